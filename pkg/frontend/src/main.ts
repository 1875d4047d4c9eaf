import { ApiClient } from "./api.js";
import { AppStore } from "./state.js";
import {
  renderErrorBanner,
  renderRecommendationList,
  renderReportViewer,
  renderRequirementBrowser,
} from "./render.js";

const api = new ApiClient("");
const store = new AppStore(api, render);

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function render(): void {
  byId("banner").innerHTML = renderErrorBanner(store.state);
  byId("browser").innerHTML = renderRequirementBrowser(store.state);
  byId("viewer").innerHTML = renderReportViewer(store.state);
  byId("sidebar").innerHTML = renderRecommendationList(store.state);
}

function scrollToSegment(segmentId: string): void {
  document
    .getElementById(`seg-${segmentId}`)
    ?.scrollIntoView({ behavior: "smooth", block: "center" });
}

function wireEvents(): void {
  byId("browser").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("button.req");
    if (button?.dataset.req) void store.selectRequirement(button.dataset.req);
  });

  byId("sidebar").addEventListener("click", (event) => {
    const link = (event.target as HTMLElement).closest<HTMLElement>("a.rec");
    if (link?.dataset.segment) {
      event.preventDefault();
      scrollToSegment(link.dataset.segment);
    }
  });

  byId("viewer").addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>("button.verdict");
    if (button?.dataset.segment && button.dataset.verdict) {
      void store.submitFeedback(
        button.dataset.segment,
        button.dataset.verdict as "relevant" | "irrelevant",
      );
    }
  });

  byId("banner").addEventListener("click", (event) => {
    if ((event.target as HTMLElement).id === "retry") void store.loadCatalog();
  });

  const kSelect = byId("k-select") as HTMLSelectElement;
  kSelect.addEventListener("change", () => {
    void store.setK(Number(kSelect.value));
  });

  const uploadInput = byId("upload") as HTMLInputElement;
  uploadInput.addEventListener("change", () => {
    const file = uploadInput.files?.[0];
    if (!file) return;
    const format = file.name.endsWith(".html")
      ? "dnk-html"
      : file.name.endsWith(".txt")
        ? "text"
        : "json";
    void store.uploadReport(file, file.name, format);
  });
}

wireEvents();
void store.loadCatalog();
render();
