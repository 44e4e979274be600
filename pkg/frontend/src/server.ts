/**
 * Stub implementation of the name-prediction wire protocol.
 *
 * POST /v1/predict expects {"method_source": string, "k": number} and
 * answers {"predictions": [{"name": string[], "confidence": number}]}
 * with confidences in (0, 1] sorted descending. GET /healthz answers 200.
 *
 * Behaviors:
 *   echo_fixed(c)  every prediction carries confidence c
 *   token_hash     confidence derived deterministically from the source
 *   error(status)  every prediction request fails with the given status
 */

import { createServer, IncomingMessage, Server, ServerResponse } from "node:http";

export type StubBehavior =
  | { mode: "echo_fixed"; confidence: number }
  | { mode: "token_hash" }
  | { mode: "error"; status: number };

export function parseBehavior(spec: string): StubBehavior {
  if (spec === "token_hash") {
    return { mode: "token_hash" };
  }
  if (spec.startsWith("echo_fixed:")) {
    const confidence = Number(spec.slice("echo_fixed:".length));
    if (!(confidence > 0 && confidence <= 1)) {
      throw new Error(`echo_fixed confidence must be in (0, 1], got ${spec}`);
    }
    return { mode: "echo_fixed", confidence };
  }
  if (spec.startsWith("error:")) {
    const status = Number(spec.slice("error:".length));
    if (!Number.isInteger(status) || status < 400 || status > 599) {
      throw new Error(`error status must be 400..599, got ${spec}`);
    }
    return { mode: "error", status };
  }
  throw new Error(`unknown mode ${spec}`);
}

/** FNV-1a over the source text; stable across runs and processes. */
export function sourceConfidence(source: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < source.length; i++) {
    hash ^= source.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return ((hash % 999999) + 1) / 1000000;
}

function sendJson(res: ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(body),
  });
  res.end(body);
}

function readBody(req: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    req.on("error", reject);
  });
}

export function createStubServer(behavior: StubBehavior): Server {
  return createServer(async (req, res) => {
    if (req.method === "GET" && req.url === "/healthz") {
      sendJson(res, 200, { status: "ok" });
      return;
    }
    if (req.method !== "POST" || req.url !== "/v1/predict") {
      sendJson(res, 404, { error: "not found" });
      return;
    }
    let source: string;
    try {
      const parsed = JSON.parse(await readBody(req));
      if (typeof parsed.method_source !== "string") {
        throw new Error("method_source missing");
      }
      source = parsed.method_source;
    } catch {
      sendJson(res, 400, { error: "malformed request body" });
      return;
    }
    if (behavior.mode === "error") {
      sendJson(res, behavior.status, { error: `simulated failure ${behavior.status}` });
      return;
    }
    const confidence =
      behavior.mode === "echo_fixed" ? behavior.confidence : sourceConfidence(source);
    sendJson(res, 200, {
      predictions: [{ name: ["candidate"], confidence }],
    });
  });
}

export function startStub(port: number, behavior: StubBehavior): Promise<Server> {
  const server = createStubServer(behavior);
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, "127.0.0.1", () => resolve(server));
  });
}
