#!/usr/bin/env node
/** Entry point: serve the wire protocol over this process's stdio, exit 0 on EOF. */

import { serve } from "./serve.js";

serve(process.stdin, process.stdout)
  .then(() => process.exit(0))
  .catch((err) => {
    console.error(`[sandbox-runner] fatal: ${String(err)}`);
    process.exit(1);
  });
