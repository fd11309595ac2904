import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli";

const FIXTURES = path.join(__dirname, "fixtures");

let tmpDir: string;
let stderr: string[];
beforeEach(() => {
  tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-cli-"));
  stderr = [];
  vi.spyOn(process.stderr, "write").mockImplementation((chunk: any) => {
    stderr.push(String(chunk));
    return true;
  });
});
afterEach(() => {
  vi.restoreAllMocks();
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

describe("plots cli", () => {
  it("curves end to end", () => {
    const out = path.join(tmpDir, "fig.svg");
    const code = main([
      "curves",
      "--input", path.join(FIXTURES, "results_two_policies.csv"),
      "--out", out,
    ]);
    expect(code).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
  });

  it("scaling end to end with a policy filter", () => {
    const out = path.join(tmpDir, "fig.svg");
    const code = main([
      "scaling",
      "--input", path.join(FIXTURES, "summary_ksweep.csv"),
      "--out", out,
      "--policy", "ucb1",
    ]);
    expect(code).toBe(0);
    expect(fs.readFileSync(out, "utf-8")).toContain("ucb1");
  });

  it("schema mismatch exits nonzero and names the columns", () => {
    const broken = path.join(tmpDir, "broken.csv");
    const text = fs.readFileSync(
      path.join(FIXTURES, "results_two_policies.csv"), "utf-8");
    fs.writeFileSync(broken, text.replace(",cum_regret", ",regret"));
    const code = main([
      "curves", "--input", broken, "--out", path.join(tmpDir, "fig.svg"),
    ]);
    expect(code).toBe(1);
    expect(stderr.join("")).toContain("cum_regret");
  });

  it("unknown command and missing flags exit nonzero", () => {
    expect(main(["histogram", "--input", "x", "--out", "y"])).toBe(1);
    expect(main(["curves", "--out", "y"])).toBe(1);
    expect(main(["curves", "--input", "x.csv"])).toBe(1);
  });

  it("missing input file exits nonzero", () => {
    const code = main([
      "curves",
      "--input", path.join(tmpDir, "absent.csv"),
      "--out", path.join(tmpDir, "fig.svg"),
    ]);
    expect(code).toBe(1);
  });
});
