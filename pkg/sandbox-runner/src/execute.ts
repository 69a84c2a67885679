/**
 * Run one case program in a fresh python child process.
 *
 * The program is candidate source, then setup, then the case, written to a
 * throwaway temp directory and run with a minimized environment. Exceeding
 * the timeout kills the child with SIGKILL. Assertion failures map to
 * "fail", any other nonzero exit to "error".
 */

import { spawn } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

import type { CaseResult } from "./protocol.js";

const PYTHON = process.env.SANDBOX_PYTHON ?? "python3";
const MAX_CAPTURE = 64 * 1024;

// Best-effort resource limits applied inside the child before guest code
// runs; advisory only, platforms without the resource module skip them.
const LIMIT_PRELUDE = [
  "try:",
  "    import resource as _resource",
  "    _resource.setrlimit(_resource.RLIMIT_AS, (1 << 31, 1 << 31))",
  "    _resource.setrlimit(_resource.RLIMIT_FSIZE, (1 << 24, 1 << 24))",
  "except Exception:",
  "    pass",
  "",
].join("\n");

export function assembleProgram(source: string, setup: string, caseSource: string): string {
  const parts = [LIMIT_PRELUDE, source];
  if (setup.trim().length > 0) {
    parts.push(setup);
  }
  parts.push(caseSource);
  return parts.join("\n\n") + "\n";
}

export async function executeCase(
  source: string,
  setup: string,
  caseSource: string,
  timeoutMs: number,
): Promise<CaseResult> {
  const workDir = await mkdtemp(join(tmpdir(), "sandbox-case-"));
  const programPath = join(workDir, "main.py");
  try {
    await writeFile(programPath, assembleProgram(source, setup, caseSource), "utf8");
    return await runPython(programPath, workDir, timeoutMs);
  } catch (err) {
    return { status: "error", detail: `runner failure: ${String(err)}` };
  } finally {
    await rm(workDir, { recursive: true, force: true });
  }
}

function runPython(programPath: string, workDir: string, timeoutMs: number): Promise<CaseResult> {
  return new Promise((resolve) => {
    const child = spawn(PYTHON, ["-I", programPath], {
      cwd: workDir,
      env: { PATH: process.env.PATH ?? "", PYTHONIOENCODING: "utf-8" },
      stdio: ["ignore", "ignore", "pipe"],
    });

    let stderr = "";
    let timedOut = false;
    const timer = setTimeout(() => {
      timedOut = true;
      child.kill("SIGKILL");
    }, timeoutMs);

    child.stderr.on("data", (chunk: Buffer) => {
      if (stderr.length < MAX_CAPTURE) {
        stderr += chunk.toString("utf8");
      }
    });

    child.on("error", (err) => {
      clearTimeout(timer);
      resolve({ status: "error", detail: `cannot run interpreter: ${err.message}` });
    });

    child.on("close", (code) => {
      clearTimeout(timer);
      if (timedOut) {
        resolve({ status: "timeout", detail: `killed after ${timeoutMs} ms` });
        return;
      }
      if (code === 0) {
        resolve({ status: "pass", detail: "" });
        return;
      }
      const detail = lastMeaningfulLine(stderr) || `exit code ${code}`;
      resolve({ status: detail.startsWith("AssertionError") ? "fail" : "error", detail });
    });
  });
}

function lastMeaningfulLine(stderr: string): string {
  const lines = stderr
    .split("\n")
    .map((l) => l.trimEnd())
    .filter((l) => l.length > 0);
  return lines.length > 0 ? lines[lines.length - 1] : "";
}
