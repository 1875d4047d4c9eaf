/**
 * Boots the review service for the e2e test: trains a small fixture
 * checkpoint (cached across runs), then launches the HTTP service with a
 * fresh data directory. The frontend talks to it exactly as a browser
 * would — over HTTP only.
 */
import { type ChildProcess, spawn } from "node:child_process";
import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { DATA_DIR, E2E_BASE, E2E_PORT, FIXTURE_DIR } from "./e2e.shared.js";

const FRONTEND_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..");

let server: ChildProcess | undefined;

function run(cmd: string, args: string[]): Promise<void> {
  return new Promise((resolve, reject) => {
    const child = spawn(cmd, args, { cwd: FRONTEND_ROOT, stdio: "inherit" });
    child.on("error", reject);
    child.on("exit", (code) =>
      code === 0 ? resolve() : reject(new Error(`${cmd} exited with ${code}`)),
    );
  });
}

async function waitForService(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${E2E_BASE}/requirements`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`service did not come up on ${E2E_BASE}`);
}

export async function setup(): Promise<void> {
  if (!fs.existsSync(path.join(FIXTURE_DIR, "checkpoint.json"))) {
    await run("python3", [path.join("scripts", "make_fixture.py"), FIXTURE_DIR]);
  }
  fs.rmSync(DATA_DIR, { recursive: true, force: true });

  server = spawn(
    "repmatch",
    [
      "serve",
      "--host", "127.0.0.1",
      "--port", String(E2E_PORT),
      "--data-dir", DATA_DIR,
      "--checkpoint", path.join(FIXTURE_DIR, "checkpoint.json"),
      "--catalog", path.join(FIXTURE_DIR, "catalog.json"),
    ],
    { stdio: "ignore" },
  );
  server.on("error", (e) => {
    throw e;
  });
  await waitForService(60_000);
}

export async function teardown(): Promise<void> {
  server?.kill("SIGTERM");
}
