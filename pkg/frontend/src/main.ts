import { parseBehavior, startStub, StubBehavior } from "./server.js";

function usage(): never {
  console.error(
    "usage: node dist/main.js [--port N] [--mode echo_fixed:<conf>|token_hash|error:<status>]"
  );
  process.exit(1);
}

let port = 8071;
let behavior: StubBehavior = { mode: "echo_fixed", confidence: 0.42 };

const args = process.argv.slice(2);
for (let i = 0; i < args.length; i++) {
  if (args[i] === "--port" && i + 1 < args.length) {
    port = Number(args[++i]);
    if (!Number.isInteger(port) || port < 0 || port > 65535) usage();
  } else if (args[i] === "--mode" && i + 1 < args.length) {
    try {
      behavior = parseBehavior(args[++i]);
    } catch (err) {
      console.error(String(err));
      usage();
    }
  } else {
    usage();
  }
}

const server = await startStub(port, behavior);
const address = server.address();
const boundPort = typeof address === "object" && address ? address.port : port;
console.log(`name-service-stub listening on 127.0.0.1:${boundPort}`);
