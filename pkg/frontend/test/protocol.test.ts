import { AddressInfo } from "node:net";
import { Server } from "node:http";
import { afterEach, describe, expect, it } from "vitest";

import { createStubServer, parseBehavior, sourceConfidence, StubBehavior } from "../src/server.js";

let server: Server | undefined;

function listen(behavior: StubBehavior): Promise<string> {
  server = createStubServer(behavior);
  return new Promise((resolve) => {
    server!.listen(0, "127.0.0.1", () => {
      const { port } = server!.address() as AddressInfo;
      resolve(`http://127.0.0.1:${port}`);
    });
  });
}

afterEach(() => {
  server?.close();
  server = undefined;
});

async function predict(base: string, body: unknown): Promise<Response> {
  return fetch(`${base}/v1/predict`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: typeof body === "string" ? body : JSON.stringify(body),
  });
}

describe("wire protocol", () => {
  it("answers healthz with 200", async () => {
    const base = await listen({ mode: "echo_fixed", confidence: 0.42 });
    const res = await fetch(`${base}/healthz`);
    expect(res.status).toBe(200);
  });

  it("echo_fixed returns the configured confidence for any input", async () => {
    const base = await listen({ mode: "echo_fixed", confidence: 0.42 });
    for (const source of ["void a() { x(); }", "int b() { return 1; }"]) {
      const res = await predict(base, { method_source: source, k: 1 });
      expect(res.status).toBe(200);
      const data = await res.json();
      expect(data.predictions).toEqual([{ name: ["candidate"], confidence: 0.42 }]);
    }
  });

  it("token_hash is deterministic per source and in (0, 1]", async () => {
    const base = await listen({ mode: "token_hash" });
    const source = "void m() { total(); }";
    const first = await (await predict(base, { method_source: source, k: 1 })).json();
    const second = await (await predict(base, { method_source: source, k: 1 })).json();
    expect(first).toEqual(second);
    const c = first.predictions[0].confidence;
    expect(c).toBeGreaterThan(0);
    expect(c).toBeLessThanOrEqual(1);
    const other = await (
      await predict(base, { method_source: "void m() { other(); }", k: 1 })
    ).json();
    expect(other.predictions[0].confidence).not.toBe(c);
  });

  it("predictions are sorted by descending confidence", async () => {
    const base = await listen({ mode: "token_hash" });
    const data = await (await predict(base, { method_source: "void m() {}", k: 3 })).json();
    const confidences = data.predictions.map((p: { confidence: number }) => p.confidence);
    const sorted = [...confidences].sort((a, b) => b - a);
    expect(confidences).toEqual(sorted);
  });

  it("error mode fails every prediction with the configured status", async () => {
    const base = await listen({ mode: "error", status: 500 });
    const res = await predict(base, { method_source: "void m() {}", k: 1 });
    expect(res.status).toBe(500);
    const health = await fetch(`${base}/healthz`);
    expect(health.status).toBe(200);
  });

  it("supports the 422 unparseable-source simulation", async () => {
    const base = await listen({ mode: "error", status: 422 });
    const res = await predict(base, { method_source: "???", k: 1 });
    expect(res.status).toBe(422);
  });

  it("rejects malformed request bodies with 400", async () => {
    const base = await listen({ mode: "echo_fixed", confidence: 0.5 });
    expect((await predict(base, "not json{{")).status).toBe(400);
    expect((await predict(base, { k: 1 })).status).toBe(400);
  });

  it("unknown paths give 404", async () => {
    const base = await listen({ mode: "echo_fixed", confidence: 0.5 });
    const res = await fetch(`${base}/v1/other`, { method: "POST", body: "{}" });
    expect(res.status).toBe(404);
  });
});

describe("behavior parsing", () => {
  it("parses all three modes", () => {
    expect(parseBehavior("echo_fixed:0.42")).toEqual({ mode: "echo_fixed", confidence: 0.42 });
    expect(parseBehavior("token_hash")).toEqual({ mode: "token_hash" });
    expect(parseBehavior("error:503")).toEqual({ mode: "error", status: 503 });
  });

  it("rejects invalid specs", () => {
    expect(() => parseBehavior("echo_fixed:1.5")).toThrow();
    expect(() => parseBehavior("echo_fixed:0")).toThrow();
    expect(() => parseBehavior("error:200")).toThrow();
    expect(() => parseBehavior("bogus")).toThrow();
  });

  it("hash confidence stays in (0, 1]", () => {
    for (const s of ["", "a", "void m() {}", "x".repeat(5000)]) {
      const c = sourceConfidence(s);
      expect(c).toBeGreaterThan(0);
      expect(c).toBeLessThanOrEqual(1);
    }
    expect(sourceConfidence("same")).toBe(sourceConfidence("same"));
  });
});
