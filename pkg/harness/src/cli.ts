// Differential driver: compile a program's generated C++ in both IO modes,
// run every given trace, and compare byte-for-byte against the simulator.
// Exit codes: 0 pass, 1 compare failure, 2 toolchain failure.

import { readFileSync } from "node:fs";

import { loadConfig } from "./config.js";
import {
  CompileFailed,
  ToolchainMissing,
  compileSource,
  emitSource,
  runBinary,
  simulatorOutput,
} from "./harness.js";

function usage(): never {
  console.error(
    "usage: cli.js compare PROGRAM.syn --trace T [--trace T2 ...] [--config FILE]",
  );
  process.exit(2);
}

function main(argv: string[]): number {
  if (argv[0] !== "compare" || argv.length < 2) usage();
  const program = argv[1];
  const traces: string[] = [];
  let configFile: string | undefined;
  for (let i = 2; i < argv.length; i++) {
    if (argv[i] === "--trace") traces.push(argv[++i]);
    else if (argv[i] === "--config") configFile = argv[++i];
    else usage();
  }
  if (traces.length === 0) usage();

  const cfg = loadConfig(configFile);
  const binaries: Record<string, string> = {};
  try {
    for (const mode of ["trace-stdio", "extern"] as const) {
      const source = emitSource(cfg, program, mode);
      binaries[mode] = compileSource(cfg, source, { extern: mode === "extern" });
    }
  } catch (e) {
    if (e instanceof ToolchainMissing || e instanceof CompileFailed) {
      console.error(`toolchain failure: ${(e as Error).message}`);
      console.error((e as CompileFailed).log ?? "");
      return 2;
    }
    throw e;
  }

  let failures = 0;
  for (const trace of traces) {
    const expected = simulatorOutput(cfg, program, trace);
    const text = readFileSync(trace, "utf-8");
    for (const mode of ["trace-stdio", "extern"] as const) {
      const actual = runBinary(binaries[mode], text);
      if (actual !== expected) {
        failures++;
        console.error(`MISMATCH ${program} ${trace} [${mode}]`);
        console.error(`expected:\n${expected}actual:\n${actual}`);
      } else {
        console.log(`ok ${program} ${trace} [${mode}]`);
      }
    }
  }
  return failures === 0 ? 0 : 1;
}

process.exit(main(process.argv.slice(2)));
