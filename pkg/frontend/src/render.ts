import type { ViewState } from "./state.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Collapsible category groups; the selected requirement is marked. */
export function renderRequirementBrowser(state: ViewState): string {
  if (!state.catalog) {
    return `<p class="empty">Loading requirement catalog…</p>`;
  }
  if (state.catalog.categories.length === 0) {
    return `<p class="empty">The catalog is empty.</p>`;
  }
  const groups = state.catalog.categories.map((group) => {
    const items = group.requirements
      .map((r) => {
        const selected = r.req_id === state.reqId ? " selected" : "";
        return (
          `<li><button class="req${selected}" data-req="${escapeHtml(r.req_id)}">` +
          `${escapeHtml(r.req_id)} — ${escapeHtml(r.title)}</button></li>`
        );
      })
      .join("");
    return (
      `<details open><summary>${escapeHtml(group.category)}</summary>` +
      `<ul>${items}</ul></details>`
    );
  });
  return groups.join("");
}

/**
 * Report segments in reading order with page markers. Recommended
 * segments get a highlight class and a rank badge, in exactly the order
 * the service returned them.
 */
export function renderReportViewer(state: ViewState): string {
  if (!state.report) {
    return `<p class="empty">Upload a report to review it.</p>`;
  }
  const rankBySegment = new Map<string, number>();
  (state.recommendations?.items ?? []).forEach((item, index) => {
    rankBySegment.set(item.segment_id, index + 1);
  });
  let lastPage: number | null = null;
  const parts: string[] = [];
  for (const seg of state.report.segments) {
    if (seg.page !== null && seg.page !== lastPage) {
      parts.push(`<div class="page-marker" data-page="${seg.page}">Page ${seg.page}</div>`);
      lastPage = seg.page;
    }
    const rank = rankBySegment.get(seg.id);
    const verdict = state.feedback[seg.id];
    const classes = ["segment", `kind-${seg.kind}`];
    if (rank !== undefined) classes.push("highlight");
    const badge =
      rank !== undefined
        ? `<span class="rank-badge">#${rank}</span>` + renderFeedbackControls(seg.id, verdict)
        : "";
    parts.push(
      `<div id="seg-${escapeHtml(seg.id)}" class="${classes.join(" ")}" data-segment="${escapeHtml(seg.id)}">` +
        badge +
        `<p>${escapeHtml(seg.text)}</p></div>`,
    );
  }
  return parts.join("");
}

function renderFeedbackControls(segmentId: string, verdict?: string): string {
  const mark = (v: string) => (verdict === v ? " marked" : "");
  return (
    `<span class="feedback">` +
    `<button class="verdict${mark("relevant")}" data-verdict="relevant" data-segment="${escapeHtml(segmentId)}">✓</button>` +
    `<button class="verdict${mark("irrelevant")}" data-verdict="irrelevant" data-segment="${escapeHtml(segmentId)}">✗</button>` +
    `</span>`
  );
}

/** Ranked recommendation sidebar; clicking an entry scrolls to the segment. */
export function renderRecommendationList(state: ViewState): string {
  const rec = state.recommendations;
  if (!rec) {
    return `<p class="empty">Select a requirement to see recommendations.</p>`;
  }
  const items = rec.items
    .map((item, index) => {
      const page = item.page !== null ? ` (page ${item.page})` : "";
      const preview = item.text.length > 120 ? `${item.text.slice(0, 120)}…` : item.text;
      return (
        `<li><a href="#seg-${escapeHtml(item.segment_id)}" class="rec" data-segment="${escapeHtml(item.segment_id)}">` +
        `<span class="rank">#${index + 1}</span> ` +
        `<span class="score">${item.score.toFixed(3)}</span>${escapeHtml(page)}<br>` +
        `${escapeHtml(preview)}</a></li>`
      );
    })
    .join("");
  return `<ol class="recommendations">${items}</ol>`;
}

export function renderErrorBanner(state: ViewState): string {
  if (!state.error) return "";
  return (
    `<div class="banner error">${escapeHtml(state.error)} ` +
    `<button id="retry">Retry</button></div>`
  );
}
