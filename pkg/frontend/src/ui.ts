import type { Metrics, VariantInfo } from "./types.js";
import type { HistoryEntry } from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function formatPsnr(value?: number): string {
  return value === undefined ? "" : `${value.toFixed(2)} dB`;
}

export function formatSsim(value?: number): string {
  return value === undefined ? "" : value.toFixed(4);
}

/** Metric badges; rendered only for values the API actually returned. */
export function metricBadges(metrics: Metrics): HTMLElement {
  const wrap = el("span", { class: "badges", "data-testid": "metric-badges" });
  if (metrics.psnr_db !== undefined) {
    wrap.append(el("span", { class: "badge", "data-testid": "psnr-badge" }, [`PSNR ${formatPsnr(metrics.psnr_db)}`]));
  }
  if (metrics.ssim !== undefined) {
    wrap.append(el("span", { class: "badge", "data-testid": "ssim-badge" }, [`SSIM ${formatSsim(metrics.ssim)}`]));
  }
  return wrap;
}

export function variantSelector(
  variants: VariantInfo[],
  selected: number | null,
  onPick: (k: number) => void,
): HTMLElement {
  const wrap = el("div", { class: "variants", "data-testid": "variant-selector" });
  for (const v of variants) {
    const button = el("button", {
      "data-testid": `variant-${v.k}`,
      "data-k": String(v.k),
      class: v.k === selected ? "variant selected" : "variant",
    }, [`K = ${v.k}`]);
    if (v.status !== "ready") {
      button.disabled = true;
      button.title = `variant K=${v.k} is unavailable (no loadable checkpoint)`;
    } else {
      button.addEventListener("click", () => onPick(v.k));
    }
    wrap.append(button);
  }
  return wrap;
}

/** Side-by-side panes with a shared zoom transform on both images. */
export function comparisonPanes(
  originalUrl: string,
  restoredUrl: string | null,
  metrics: Metrics,
  variantK: number | null,
): HTMLElement {
  const original = el("img", { src: originalUrl, alt: "original upload", "data-testid": "pane-original" });
  const restoredAttrs: Record<string, string> = { alt: "restored output", "data-testid": "pane-restored" };
  if (restoredUrl) restoredAttrs.src = restoredUrl;
  const restored = el("img", restoredAttrs);

  let zoom = 1;
  const applyZoom = () => {
    const transform = `scale(${zoom.toFixed(2)})`;
    original.style.transform = transform;
    restored.style.transform = transform;
  };
  const onWheel = (event: WheelEvent) => {
    event.preventDefault();
    zoom = Math.min(8, Math.max(1, zoom * (event.deltaY < 0 ? 1.1 : 1 / 1.1)));
    applyZoom();
  };

  const caption = variantK === null ? "restored" : `restored (K = ${variantK})`;
  const wrap = el("div", { class: "compare", "data-testid": "comparison" }, [
    el("figure", {}, [original, el("figcaption", {}, ["original"])]),
    el("figure", {}, [restored, el("figcaption", {}, [caption, metricBadges(metrics)])]),
  ]);
  wrap.addEventListener("wheel", onWheel, { passive: false });
  return wrap;
}

export function historyTable(history: HistoryEntry[], onShow: (entry: HistoryEntry) => void): HTMLElement {
  const body = el("tbody");
  for (const entry of history) {
    const row = el("tr", { "data-testid": "history-row", "data-k": String(entry.variantK) }, [
      el("td", {}, [`K = ${entry.variantK}`]),
      el("td", {}, [formatPsnr(entry.metrics.psnr_db)]),
      el("td", {}, [formatSsim(entry.metrics.ssim)]),
    ]);
    const show = el("button", { class: "link" }, ["show"]);
    show.addEventListener("click", () => onShow(entry));
    row.append(el("td", {}, [show]));
    body.append(row);
  }
  return el("table", { class: "history", "data-testid": "history" }, [
    el("thead", {}, [el("tr", {}, [
      el("th", {}, ["variant"]), el("th", {}, ["PSNR"]), el("th", {}, ["SSIM"]), el("th", {}, [""]),
    ])]),
    body,
  ]);
}

/** Paper-reported reference numbers beside any live metrics from this session. */
export function variantTable(
  variants: VariantInfo[],
  liveMetrics: (k: number) => Metrics | undefined,
): HTMLElement {
  const body = el("tbody");
  for (const v of variants) {
    const live = liveMetrics(v.k);
    body.append(el("tr", { "data-testid": `variant-row-${v.k}` }, [
      el("td", {}, [String(v.k)]),
      el("td", {}, [v.status]),
      el("td", { "data-testid": `reported-${v.k}` },
        [v.ssim_reported === null || v.ssim_reported === undefined
          ? ""
          : `${formatSsim(v.ssim_reported)} / ${formatPsnr(v.psnr_reported ?? undefined)} (paper-reported)`]),
      el("td", { "data-testid": `live-${v.k}` },
        [live ? `${formatSsim(live.ssim)} / ${formatPsnr(live.psnr_db)}` : ""]),
    ]));
  }
  return el("table", { class: "variant-table", "data-testid": "variant-table" }, [
    el("thead", {}, [el("tr", {}, [
      el("th", {}, ["K"]), el("th", {}, ["status"]),
      el("th", {}, ["paper-reported SSIM / PSNR"]), el("th", {}, ["live SSIM / PSNR"]),
    ])]),
    body,
  ]);
}

export function errorBanner(message: string): HTMLElement {
  return el("div", { class: "error", role: "alert", "data-testid": "error" }, [message]);
}

export function emptyState(message: string): HTMLElement {
  return el("div", { class: "empty", "data-testid": "empty-state" }, [message]);
}
