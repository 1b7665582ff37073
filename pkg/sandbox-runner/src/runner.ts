import { spawn, type ChildProcess } from "node:child_process";
import readline from "node:readline";

import { EXECUTOR_SOURCE, VALIDATOR_SOURCE } from "./harness.js";
import {
  DEFAULT_TEST_TIMEOUT_MS,
  type ExecuteRequest,
  type Request,
  type Response,
  type TestResult,
  errorResponse,
  suiteBudgetMs,
} from "./protocol.js";

const PYTHON = process.env.SANDBOX_PYTHON ?? "python3";

/**
 * Serves sandbox requests. Validation goes through one long-lived child
 * that only parses; every execute request gets a fresh child so crashes
 * and leaked state cannot cross requests. The runner kills an execution
 * child at twice the suite budget and reports the remaining tests as
 * errors.
 */
export class Runner {
  private validator: ChildProcess | null = null;
  private validatorLines: AsyncIterator<string> | null = null;

  async handle(request: Request): Promise<Response> {
    if (request.mode === "validate") {
      try {
        return { mode: "validate", results: await this.validate(request.tests) };
      } catch (exc) {
        this.dropValidator();
        return errorResponse(`validator failed: ${String(exc)}`);
      }
    }
    return this.execute(request);
  }

  close(): void {
    this.dropValidator();
  }

  private ensureValidator(): ChildProcess {
    if (this.validator === null || this.validator.exitCode !== null) {
      this.validator = spawn(PYTHON, ["-c", VALIDATOR_SOURCE], {
        stdio: ["pipe", "pipe", "ignore"],
      });
      const rl = readline.createInterface({
        input: this.validator.stdout!,
        terminal: false,
      });
      this.validatorLines = rl[Symbol.asyncIterator]();
    }
    return this.validator;
  }

  private dropValidator(): void {
    if (this.validator !== null && this.validator.exitCode === null) {
      this.validator.kill("SIGKILL");
    }
    this.validator = null;
    this.validatorLines = null;
  }

  private async validate(tests: string[]): Promise<boolean[]> {
    const child = this.ensureValidator();
    child.stdin!.write(JSON.stringify({ tests }) + "\n");
    const next = await this.validatorLines!.next();
    if (next.done) {
      throw new Error("validator exited unexpectedly");
    }
    const results = JSON.parse(next.value) as boolean[];
    if (results.length !== tests.length) {
      throw new Error("validator returned a misaligned result list");
    }
    return results;
  }

  private execute(request: ExecuteRequest): Promise<Response> {
    const perTest = request.timeout_ms ?? DEFAULT_TEST_TIMEOUT_MS;
    const hardDeadline = 2 * suiteBudgetMs(request.tests.length, perTest);
    const payload = JSON.stringify({
      source: request.source,
      tests: request.tests,
      timeout_ms: perTest,
    });

    return new Promise((resolve) => {
      const child = spawn(PYTHON, ["-c", EXECUTOR_SOURCE], {
        stdio: ["pipe", "pipe", "ignore"],
      });
      let output = "";
      let settled = false;

      const finish = (response: Response) => {
        if (!settled) {
          settled = true;
          clearTimeout(killTimer);
          resolve(response);
        }
      };

      const killTimer = setTimeout(() => {
        child.kill("SIGKILL");
        finish({
          mode: "execute",
          results: crashResults(request.tests, "execution child exceeded the hard deadline"),
        });
      }, hardDeadline + 250);

      child.stdout!.on("data", (chunk: Buffer) => {
        output += chunk.toString("utf-8");
      });
      child.on("error", (exc) => {
        finish(errorResponse(`cannot spawn executor: ${String(exc)}`));
      });
      child.on("close", () => {
        const line = output.split("\n").find((l) => l.trim().length > 0);
        if (!line) {
          finish({
            mode: "execute",
            results: crashResults(request.tests, "execution child crashed before reporting"),
          });
          return;
        }
        try {
          const results = JSON.parse(line) as TestResult[];
          if (!Array.isArray(results) || results.length !== request.tests.length) {
            finish(errorResponse("executor returned a misaligned result list"));
            return;
          }
          finish({ mode: "execute", results });
        } catch (exc) {
          finish(errorResponse(`executor sent malformed JSON: ${String(exc)}`));
        }
      });

      child.stdin!.write(payload + "\n");
      child.stdin!.end();
    });
  }
}

function crashResults(tests: string[], message: string): TestResult[] {
  return tests.map(() => ({ status: "error", message, duration_ms: 0 }));
}
