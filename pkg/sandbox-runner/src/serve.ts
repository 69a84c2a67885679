/**
 * Serial worker loop: one JSON request per stdin line, one JSON response
 * per stdout line, in order. Bad input never crashes the loop: malformed
 * lines get an id "" error response. Blank lines are record separators and
 * produce no response (answering them would desync a client that writes
 * exactly one line per request). Logs go to stderr only.
 */

import { createInterface } from "node:readline";

import { executeCase } from "./execute.js";
import { malformedResponse, parseRequest, type WireResponse } from "./protocol.js";

export async function serve(
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
): Promise<void> {
  const lines = createInterface({ input, crlfDelay: Number.POSITIVE_INFINITY });
  for await (const line of lines) {
    if (line.trim().length === 0) {
      continue;
    }
    let response: WireResponse;
    try {
      response = await handleLine(line);
    } catch (err) {
      // last line of defence: one bad request must never kill the loop
      console.error(`[sandbox-runner] unexpected failure: ${String(err)}`);
      response = malformedResponse();
    }
    output.write(JSON.stringify(response) + "\n");
  }
}

async function handleLine(line: string): Promise<WireResponse> {
  const request = parseRequest(line);
  if (request === null) {
    return malformedResponse();
  }
  const started = Date.now();
  const results = [];
  for (const caseSource of request.cases) {
    results.push(await executeCase(request.source, request.setup, caseSource, request.timeout_ms));
  }
  return { id: request.id, results, duration_ms: Date.now() - started };
}
