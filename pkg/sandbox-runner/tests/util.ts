import { type ChildProcessWithoutNullStreams, spawn } from "node:child_process";
import { createInterface, type Interface } from "node:readline";
import { fileURLToPath } from "node:url";

const WORKER_PATH = fileURLToPath(new URL("../dist/worker.js", import.meta.url));

export interface WireResponseShape {
  id: string;
  results: { status: string; detail: string }[];
  duration_ms: number;
}

/** Spawns the built worker and exposes a line-oriented request/response API. */
export class WorkerHandle {
  private child: ChildProcessWithoutNullStreams;
  private lines: Interface;
  private pending: Promise<string>[] = [];
  private resolvers: ((line: string) => void)[] = [];
  exited: Promise<number | null>;

  constructor() {
    this.child = spawn("node", [WORKER_PATH], { stdio: ["pipe", "pipe", "inherit"] });
    this.lines = createInterface({ input: this.child.stdout, crlfDelay: Number.POSITIVE_INFINITY });
    this.lines.on("line", (line) => {
      const resolver = this.resolvers.shift();
      if (resolver) {
        resolver(line);
      }
    });
    this.exited = new Promise((resolve) => this.child.on("close", (code) => resolve(code)));
  }

  /** Queue a raw line and return the promise of the matching response line. */
  sendRaw(line: string): Promise<string> {
    const reply = new Promise<string>((resolve) => this.resolvers.push(resolve));
    this.pending.push(reply);
    this.child.stdin.write(line + "\n");
    return reply;
  }

  async send(request: object): Promise<WireResponseShape> {
    const line = await this.sendRaw(JSON.stringify(request));
    return JSON.parse(line) as WireResponseShape;
  }

  closeInput(): void {
    this.child.stdin.end();
  }

  kill(): void {
    this.child.kill("SIGKILL");
  }
}

/** Deterministic 32-bit PRNG so fuzz runs are reproducible. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
