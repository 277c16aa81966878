import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";

export interface HarnessConfig {
  compiler: string;
  std: string; // "auto" or e.g. "c++17"
  optimize: string;
  march: string;
  extraFlags: string[];
  synkc: string[];
}

export const DEFAULT_CONFIG: HarnessConfig = {
  compiler: "g++",
  std: "auto",
  optimize: "-Ofast",
  march: "-march=native",
  extraFlags: [],
  synkc: ["python3", "-m", "synkc"],
};

/** Parse simple `key = value` lines; `#` starts a comment. */
export function parseConfigText(text: string): HarnessConfig {
  const cfg = { ...DEFAULT_CONFIG, extraFlags: [...DEFAULT_CONFIG.extraFlags] };
  for (const raw of text.split("\n")) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new Error(`bad config line: ${raw}`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    switch (key) {
      case "compiler": cfg.compiler = value; break;
      case "std": cfg.std = value; break;
      case "optimize": cfg.optimize = value; break;
      case "march": cfg.march = value; break;
      case "extra_flags": cfg.extraFlags = value ? value.split(/\s+/) : []; break;
      case "synkc": cfg.synkc = value.split(/\s+/); break;
      default: throw new Error(`unknown config key: ${key}`);
    }
  }
  return cfg;
}

export function loadConfig(file?: string): HarnessConfig {
  const candidate = file ?? path.join(harnessRoot(), "harness.toml");
  if (!existsSync(candidate)) return { ...DEFAULT_CONFIG };
  return parseConfigText(readFileSync(candidate, "utf-8"));
}

export function harnessRoot(): string {
  // dist/config.js or src/config.ts both sit one level below the package root
  return path.resolve(path.dirname(new URL(import.meta.url).pathname), "..");
}

export function repoRoot(): string {
  return path.resolve(harnessRoot(), "..");
}

const PROBE_SOURCE = "#include <variant>\nint main() { std::variant<int> v{1}; return 0; }\n";
const STD_CANDIDATES = ["c++26", "c++23", "c++20", "c++17"];
const stdCache = new Map<string, string>();

/** Newest -std= the compiler accepts, probed once per compiler. */
export function resolveStd(cfg: HarnessConfig): string {
  if (cfg.std !== "auto") return cfg.std;
  const cached = stdCache.get(cfg.compiler);
  if (cached) return cached;
  const dir = mkdtempSync(path.join(tmpdir(), "synprobe-"));
  const src = path.join(dir, "probe.cpp");
  writeFileSync(src, PROBE_SOURCE);
  for (const std of STD_CANDIDATES) {
    try {
      execFileSync(cfg.compiler, [`-std=${std}`, "-fsyntax-only", src], {
        stdio: "pipe",
      });
      stdCache.set(cfg.compiler, std);
      return std;
    } catch {
      continue;
    }
  }
  throw new Error(`${cfg.compiler} accepts none of ${STD_CANDIDATES.join(", ")}`);
}

export function compileFlags(cfg: HarnessConfig): string[] {
  const flags = [`-std=${resolveStd(cfg)}`];
  if (cfg.optimize) flags.push(cfg.optimize);
  if (cfg.march) flags.push(cfg.march);
  flags.push(...cfg.extraFlags);
  return flags;
}
