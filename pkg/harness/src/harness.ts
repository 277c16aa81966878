import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";

import { HarnessConfig, compileFlags, harnessRoot } from "./config.js";

export class HarnessError extends Error {
  constructor(message: string, public readonly log: string = "") {
    super(message);
  }
}

export class ToolchainMissing extends HarnessError {}
export class CompileFailed extends HarnessError {}
export class RuntimeFailed extends HarnessError {}

export function stubLibraryPath(): string {
  return path.join(harnessRoot(), "assets", "syn_stub.cpp");
}

function run(cmd: string, args: string[], input?: string) {
  const res = spawnSync(cmd, args, { input, encoding: "utf-8" });
  if (res.error && (res.error as NodeJS.ErrnoException).code === "ENOENT") {
    throw new ToolchainMissing(`${cmd} not found on PATH`);
  }
  return res;
}

/** Compile a generated source file; extern-mode sources link the trace stub. */
export function compileSource(
  cfg: HarnessConfig,
  sourcePath: string,
  opts: { extern?: boolean } = {},
): string {
  const dir = mkdtempSync(path.join(tmpdir(), "synbuild-"));
  const exe = path.join(dir, "program");
  const sources = [sourcePath];
  if (opts.extern) sources.push(stubLibraryPath());
  const args = [...compileFlags(cfg), "-o", exe, ...sources];
  const res = run(cfg.compiler, args, undefined);
  if (res.status !== 0) {
    throw new CompileFailed(
      `${cfg.compiler} exited with ${res.status}`,
      `${cfg.compiler} ${args.join(" ")}\n${res.stderr}`,
    );
  }
  return exe;
}

export function runBinary(exe: string, traceText: string): string {
  const res = run(exe, [], traceText);
  if (res.status !== 0) {
    throw new RuntimeFailed(`binary exited with ${res.status}`, res.stderr ?? "");
  }
  return res.stdout;
}

/** Compile a generated source and run it over a trace file. */
export function buildAndRun(
  cfg: HarnessConfig,
  generatedSource: string,
  inputTrace: string,
  opts: { extern?: boolean } = {},
): string {
  const exe = compileSource(cfg, generatedSource, opts);
  return runBinary(exe, readFileSync(inputTrace, "utf-8"));
}

/** Emit back-end code for a program via the compiler CLI. */
export function emitSource(
  cfg: HarnessConfig,
  programPath: string,
  ioMode: "trace-stdio" | "extern",
): string {
  const dir = mkdtempSync(path.join(tmpdir(), "synemit-"));
  const out = path.join(dir, ioMode === "extern" ? "prog_ext.cpp" : "prog.cpp");
  const [cmd, ...pre] = cfg.synkc;
  const res = run(cmd, [...pre, "compile", programPath, "-o", out, "--io", ioMode]);
  if (res.status !== 0) {
    throw new HarnessError(`synkc compile failed`, res.stderr ?? "");
  }
  return out;
}

/** Reference output for a trace, via the FSM simulator CLI. */
export function simulatorOutput(
  cfg: HarnessConfig,
  programPath: string,
  tracePath: string,
): string {
  const [cmd, ...pre] = cfg.synkc;
  const res = run(cmd, [...pre, "sim", programPath, "--trace", tracePath]);
  if (res.status !== 0) {
    throw new HarnessError(`synkc sim failed`, res.stderr ?? "");
  }
  return res.stdout;
}

/** Input signal names declared by a program source. */
export function inputSignalsOf(programPath: string): string[] {
  const text = readFileSync(programPath, "utf-8");
  const names: string[] = [];
  for (const m of text.matchAll(/^\s*input signal ([^;]+);/gm)) {
    for (const n of m[1].split(",")) names.push(n.trim());
  }
  return names.sort();
}

/** Deterministic PRNG so random traces are reproducible across runs. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomTraceText(
  inputs: string[],
  ticks: number,
  seed: number,
  density = 0.35,
): string {
  const rnd = mulberry32(seed);
  const lines: string[] = [];
  for (let t = 0; t < ticks; t++) {
    const present = inputs.filter(() => rnd() < density);
    lines.push(present.length ? present.join(" ") : "-");
  }
  return lines.map((l) => l + "\n").join("");
}

export function writeTempTrace(text: string): string {
  const dir = mkdtempSync(path.join(tmpdir(), "syntrace-"));
  const file = path.join(dir, "input.trace");
  writeFileSync(file, text);
  return file;
}
