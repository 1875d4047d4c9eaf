/**
 * End-to-end flow against the live review service (started by
 * e2e.setup.ts): upload a fixture report, select a requirement, verify the
 * viewer highlights exactly K segments in the order the service ranked
 * them, then submit one feedback verdict and find exactly that event in
 * the export.
 */
import fs from "node:fs";

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderReportViewer } from "../src/render.js";
import { AppStore } from "../src/state.js";
import { E2E_BASE, REPORT_PATH } from "./e2e.shared.js";

const K = 3;

describe("review flow over HTTP", () => {
  const api = new ApiClient(E2E_BASE);
  const store = new AppStore(api);
  let docId: string;
  let reqId: string;

  beforeAll(async () => {
    const payload = fs.readFileSync(REPORT_PATH);
    const upload = await api.uploadReport(new Blob([payload]), "report.json", "json");
    expect(upload.status).toBe("scored");
    docId = upload.doc_id;

    await store.loadCatalog();
    reqId = store.state.catalog!.categories[0]!.requirements[0]!.req_id;

    await store.selectDocument(docId);
    await store.selectRequirement(reqId);
  });

  it("highlights exactly K segments, in the order the service returned", () => {
    const items = store.state.recommendations!.items;
    expect(items).toHaveLength(K);
    const serviceScores = items.map((i) => i.score);
    expect(serviceScores).toEqual([...serviceScores].sort((a, b) => b - a));
    expect(store.highlightedSegments()).toEqual(items.map((i) => i.segment_id));

    const html = renderReportViewer(store.state);
    const badged = [
      ...html.matchAll(/id="seg-([^"]+)"[^>]*highlight[^>]*><span class="rank-badge">#(\d+)/g),
    ];
    expect(badged).toHaveLength(K);
    const byRank = [...badged]
      .sort((a, b) => Number(a[2]) - Number(b[2]))
      .map((m) => m[1]);
    expect(byRank).toEqual(items.map((i) => i.segment_id));
  });

  it("one feedback click yields exactly one exported event", async () => {
    const segmentId = store.state.recommendations!.items[0]!.segment_id;
    await store.submitFeedback(segmentId, "relevant");
    expect(store.state.error).toBeNull();
    expect(store.state.feedback[segmentId]).toBe("relevant");

    const exported = await fetch(`${E2E_BASE}/feedback/export`).then((r) => r.text());
    const events = exported
      .split("\n")
      .filter(Boolean)
      .map((line) => JSON.parse(line));
    expect(events).toHaveLength(1);
    expect(events[0]).toMatchObject({
      doc_id: docId,
      req_id: reqId,
      segment_id: segmentId,
    });
  });
});
