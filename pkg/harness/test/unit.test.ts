import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { describe, expect, it } from "vitest";

import {
  DEFAULT_CONFIG,
  compileFlags,
  loadConfig,
  parseConfigText,
  repoRoot,
  resolveStd,
} from "../src/config.js";
import {
  inputSignalsOf,
  mulberry32,
  randomTraceText,
  stubLibraryPath,
} from "../src/harness.js";

describe("config", () => {
  it("parses key=value lines and comments", () => {
    const cfg = parseConfigText(
      "# comment\ncompiler = clang++\nstd = c++20\nextra_flags = -Wall -Wextra\n",
    );
    expect(cfg.compiler).toBe("clang++");
    expect(cfg.std).toBe("c++20");
    expect(cfg.extraFlags).toEqual(["-Wall", "-Wextra"]);
    expect(cfg.optimize).toBe(DEFAULT_CONFIG.optimize);
  });

  it("rejects unknown keys", () => {
    expect(() => parseConfigText("nonsense = 1\n")).toThrow(/unknown config key/);
  });

  it("loads the repo default config", () => {
    const cfg = loadConfig();
    expect(cfg.compiler).toBe("g++");
    expect(cfg.synkc).toEqual(["python3", "-m", "synkc"]);
  });

  it("probes the newest accepted standard once", () => {
    const cfg = loadConfig();
    const std = resolveStd(cfg);
    expect(["c++26", "c++23", "c++20", "c++17"]).toContain(std);
    expect(resolveStd(cfg)).toBe(std); // cached
    expect(compileFlags(cfg)[0]).toBe(`-std=${std}`);
  });

  it("respects a pinned standard", () => {
    const cfg = { ...DEFAULT_CONFIG, std: "c++17" };
    expect(compileFlags(cfg)).toContain("-std=c++17");
  });
});

describe("trace generation", () => {
  it("is deterministic per seed", () => {
    const a = randomTraceText(["A", "B"], 40, 7);
    const b = randomTraceText(["A", "B"], 40, 7);
    expect(a).toBe(b);
    expect(a).not.toBe(randomTraceText(["A", "B"], 40, 8));
  });

  it("uses only the given inputs and dash lines", () => {
    const rnd = mulberry32(1);
    expect(typeof rnd()).toBe("number");
    const text = randomTraceText(["X", "Y"], 25, 3);
    for (const line of text.trimEnd().split("\n")) {
      expect(line).toMatch(/^(-|((X|Y)( (X|Y))*))$/);
    }
    expect(text.endsWith("\n")).toBe(true);
  });
});

describe("program scanning", () => {
  it("finds ABRO's input signals", () => {
    const abro = path.join(repoRoot(), "benchmarks", "abro.syn");
    expect(inputSignalsOf(abro)).toEqual(["A", "B", "R"]);
  });

  it("finds multi-declaration inputs", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "synscan-"));
    const f = path.join(dir, "p.syn");
    writeFileSync(f, "input signal P1, P2;\ninput signal Q;\noutput signal O;\n");
    expect(inputSignalsOf(f)).toEqual(["P1", "P2", "Q"]);
  });
});

describe("compare CLI exit codes", () => {
  it("exits 2 on a missing toolchain", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "synbadcfg-"));
    const cfgFile = path.join(dir, "harness.toml");
    writeFileSync(cfgFile, "compiler = definitely-not-a-compiler\nstd = c++17\n");
    const abro = path.join(repoRoot(), "benchmarks", "abro.syn");
    const n1 = path.join(repoRoot(), "benchmarks", "traces", "abro_n1.trace");
    const res = spawnSync(
      "node",
      [path.join(harnessRootForTest(), "dist", "cli.js"), "compare", abro,
       "--trace", n1, "--config", cfgFile],
      { encoding: "utf-8" },
    );
    expect(res.status).toBe(2);
  });

  it("exits 0 when everything matches", () => {
    const abro = path.join(repoRoot(), "benchmarks", "abro.syn");
    const n2 = path.join(repoRoot(), "benchmarks", "traces", "abro_n2.trace");
    const res = spawnSync(
      "node",
      [path.join(harnessRootForTest(), "dist", "cli.js"), "compare", abro, "--trace", n2],
      { encoding: "utf-8" },
    );
    expect(res.stderr).toBe("");
    expect(res.status).toBe(0);
  });
});

function harnessRootForTest(): string {
  return path.resolve(path.dirname(new URL(import.meta.url).pathname), "..");
}

describe("extern stub library", () => {
  it("builds stand-alone into a no-op object", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "synstub-"));
    const obj = path.join(dir, "stub.o");
    execFileSync("g++", ["-std=c++17", "-c", stubLibraryPath(), "-o", obj]);
  });

  it("reports all-absent inputs once the trace is exhausted", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "synstub-"));
    const driver = path.join(dir, "driver.cpp");
    writeFileSync(
      driver,
      `#include <cstdio>
extern "C" int syn_next_tick(void);
extern "C" unsigned char syn_read_input(const char*);
int main() {
  int ticks = 0;
  while (syn_next_tick()) ticks++;
  // exhausted: every sample reads absent
  std::printf("%d %d %d\\n", ticks, syn_read_input("A"), syn_read_input("B"));
  return 0;
}
`,
    );
    const exe = path.join(dir, "driver");
    execFileSync("g++", ["-std=c++17", driver, stubLibraryPath(), "-o", exe]);
    const out = execFileSync(exe, { input: "A\nA B\n", encoding: "utf-8" });
    expect(out).toBe("2 0 0\n");
  });

  it("always grants the first tick, even on an empty trace", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "synstub-"));
    const driver = path.join(dir, "driver.cpp");
    writeFileSync(
      driver,
      `#include <cstdio>
extern "C" int syn_next_tick(void);
int main() { int t = 0; while (syn_next_tick()) t++; std::printf("%d\\n", t); }
`,
    );
    const exe = path.join(dir, "driver");
    execFileSync("g++", ["-std=c++17", driver, stubLibraryPath(), "-o", exe]);
    expect(execFileSync(exe, { input: "", encoding: "utf-8" })).toBe("1\n");
  });
});
