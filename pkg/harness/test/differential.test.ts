// Generated-code equivalence: for every benchmark and 50 random traces, the
// compiled binary's output is byte-identical to the simulator's, in both
// trace-stdio and extern-hook IO modes; plus structural checks on the
// emitted ABRO source.

import { mkdtempSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { loadConfig, repoRoot } from "../src/config.js";
import {
  buildAndRun,
  compileSource,
  emitSource,
  inputSignalsOf,
  randomTraceText,
  runBinary,
  simulatorOutput,
  writeTempTrace,
} from "../src/harness.js";

const cfg = loadConfig();
const BENCH = path.join(repoRoot(), "benchmarks");
const TRACES = path.join(BENCH, "traces");
const BENCHMARKS = ["abro", "conveyor", "router", "watchdogs"];

const TRACES_PER_BENCH = 50;
const TICKS = 60;

describe("emitted ABRO source structure", () => {
  let source = "";
  beforeAll(() => {
    source = readFileSync(emitSource(cfg, path.join(BENCH, "abro.syn"), "trace-stdio"), "utf-8");
  });

  it("contains exactly five transition-function definitions", () => {
    const defs = source.match(/^inline (?:constexpr )?void Thread\d+<\w+>::tick\(\)/gm);
    expect(defs).toHaveLength(5);
  });

  it("has the three-way branch for thread-1 state S0", () => {
    const body = source.split("inline void Thread1<S0>::tick() {")[1].split("\n}")[0];
    const conds = [...body.matchAll(/(?:if|else if) \((.*)\) \{/g)].map((m) => m[1]);
    expect(conds[0]).toBe("R_prev.status");
    expect(conds[1]).toContain("not R_prev.status");
    expect(conds[1]).toContain("A_prev.status");
    // pre-emption and normal completion both end the thread; otherwise wait
    expect(body.match(/Thread1<E>\{\}/g)).toHaveLength(2);
    expect(body).toContain("st1 = Thread1<S0>{};");
  });

  it("keeps guards on previous statuses only", () => {
    const region = source.split("// transition functions")[1].split("// dispatch helpers")[0];
    for (const m of region.matchAll(/(?:if|else if) \((.*)\) \{/g)) {
      expect(m[1]).not.toContain("_curr");
    }
  });
});

describe("scenario cross-checks", () => {
  it("extern-mode ABRO on scenario N2 matches trace-stdio output", () => {
    const program = path.join(BENCH, "abro.syn");
    const trace = path.join(TRACES, "abro_n2.trace");
    const plain = buildAndRun(cfg, emitSource(cfg, program, "trace-stdio"), trace);
    const ext = buildAndRun(cfg, emitSource(cfg, program, "extern"), trace, {
      extern: true,
    });
    expect(ext).toBe(plain);
    expect(plain).toBe("-\n-\n");
  });

  it("empty program and empty trace give the single initialisation tick", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "synempty-"));
    const program = path.join(dir, "nothing.syn");
    writeFileSync(program, "nothing\n");
    const emptyTrace = writeTempTrace("");
    for (const mode of ["trace-stdio", "extern"] as const) {
      const out = buildAndRun(cfg, emitSource(cfg, program, mode), emptyTrace, {
        extern: mode === "extern",
      });
      expect(out).toBe("-\n");
    }
  });

  it("100-tick random ABRO trace equals the simulator output", () => {
    const program = path.join(BENCH, "abro.syn");
    const trace = writeTempTrace(randomTraceText(["A", "B", "R"], 100, 0xab20));
    const out = buildAndRun(cfg, emitSource(cfg, program, "trace-stdio"), trace);
    expect(out).toBe(simulatorOutput(cfg, program, trace));
  });
});

describe("benchmark equivalence, both IO modes", () => {
  for (const name of BENCHMARKS) {
    it(`${name}: ${TRACES_PER_BENCH} random traces byte-identical`, () => {
      const program = path.join(BENCH, `${name}.syn`);
      const inputs = inputSignalsOf(program);
      const plainExe = compileSource(cfg, emitSource(cfg, program, "trace-stdio"));
      const externExe = compileSource(cfg, emitSource(cfg, program, "extern"), {
        extern: true,
      });
      for (let i = 0; i < TRACES_PER_BENCH; i++) {
        const seed = (name.length << 16) + i;
        const density = 0.15 + (i % 5) * 0.15;
        const text = randomTraceText(inputs, TICKS, seed, density);
        const traceFile = writeTempTrace(text);
        const expected = simulatorOutput(cfg, program, traceFile);
        expect(runBinary(plainExe, text), `${name} trace ${i} stdio`).toBe(expected);
        expect(runBinary(externExe, text), `${name} trace ${i} extern`).toBe(expected);
      }
    });
  }

  it("golden scenario traces replay through the binaries", () => {
    for (const name of BENCHMARKS) {
      const program = path.join(BENCH, `${name}.syn`);
      const exe = compileSource(cfg, emitSource(cfg, program, "trace-stdio"));
      const entries = readdirSync(TRACES)
        .filter((f) => f.startsWith(`${name}_`) && f.endsWith(".trace") && !f.endsWith(".golden.trace"));
      for (const entry of entries) {
        const golden = readFileSync(
          path.join(TRACES, entry.replace(/\.trace$/, ".golden.trace")),
          "utf-8",
        );
        const out = runBinary(exe, readFileSync(path.join(TRACES, entry), "utf-8"));
        expect(out, `${name}/${entry}`).toBe(golden);
      }
    }
  });
});
