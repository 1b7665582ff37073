// Entry point: one JSON request per stdin line, one JSON response per
// stdout line, strictly in order. Malformed lines answer an error response
// and the loop keeps serving.

import readline from "node:readline";

import { parseRequest } from "./protocol.js";
import { Runner } from "./runner.js";

const runner = new Runner();
const rl = readline.createInterface({ input: process.stdin, terminal: false });

let queue: Promise<void> = Promise.resolve();

rl.on("line", (line: string) => {
  if (!line.trim()) {
    return;
  }
  queue = queue.then(async () => {
    const parsed = parseRequest(line);
    const response = "error" in parsed ? parsed : await runner.handle(parsed);
    process.stdout.write(JSON.stringify(response) + "\n");
  });
});

rl.on("close", () => {
  void queue.then(() => {
    runner.close();
    process.exit(0);
  });
});
