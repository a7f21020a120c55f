import type { RestoreApi } from "./api.js";
import { LiveMetricsStore, RestoreSession, variantAvailable } from "./state.js";
import type { HistoryEntry, VariantInfo } from "./types.js";
import {
  comparisonPanes,
  el,
  emptyState,
  errorBanner,
  historyTable,
  variantSelector,
  variantTable,
} from "./ui.js";

function objectUrl(file: Blob): string {
  // jsdom has no createObjectURL; any stable placeholder keeps rendering sane
  return typeof URL.createObjectURL === "function" ? URL.createObjectURL(file) : "about:blank#upload";
}

/** Single-page comparison app: upload, pick a variant, compare, iterate. */
export class App {
  variants: VariantInfo[] = [];
  session: RestoreSession | null = null;
  selectedK: number | null = null;
  referenceFile: Blob | null = null;
  variantsError: string | null = null;
  private live = new LiveMetricsStore();
  private shown: HistoryEntry | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: RestoreApi,
  ) {}

  async start(): Promise<void> {
    try {
      this.variants = await this.api.fetchVariants();
      this.variantsError = null;
      const firstReady = this.variants.find((v) => v.status === "ready");
      this.selectedK = firstReady ? firstReady.k : null;
    } catch (err) {
      this.variants = [];
      this.variantsError = `model service unreachable: ${String(err)}`;
    }
    this.render();
  }

  setReference(file: Blob | null): void {
    this.referenceFile = file;
    this.render();
  }

  upload(file: Blob): void {
    this.session = new RestoreSession(this.api, file, objectUrl(file), this.referenceFile);
    this.shown = null;
    this.session.onChange(() => {
      if (this.session) {
        for (const entry of this.session.history) this.live.record(entry);
      }
      this.render();
    });
    this.render();
    if (this.selectedK !== null) void this.session.request(this.selectedK);
  }

  pickVariant(k: number): void {
    if (!variantAvailable(this.variants, k)) return;
    this.selectedK = k;
    this.shown = null;
    if (this.session) void this.session.request(k);
    this.render();
  }

  render(): void {
    this.root.replaceChildren();

    if (this.variantsError) {
      this.root.append(errorBanner(this.variantsError));
    }
    this.root.append(this.buildDropzone());
    if (this.variants.length > 0) {
      this.root.append(variantSelector(this.variants, this.selectedK, (k) => this.pickVariant(k)));
    } else if (!this.variantsError) {
      this.root.append(emptyState("no model variants published yet"));
    }

    if (this.session) {
      if (this.session.error) {
        this.root.append(errorBanner(this.session.error));
      }
      if (this.session.busy) {
        this.root.append(el("div", { class: "busy", "data-testid": "busy" }, ["restoring..."]));
      }
      const shown = this.shown ?? this.session.current;
      if (shown || this.session.history.length === 0) {
        this.root.append(
          comparisonPanes(
            this.session.originalUrl,
            shown?.restoredUrl ?? null,
            shown?.metrics ?? {},
            shown?.variantK ?? null,
          ),
        );
      }
      if (this.session.history.length > 0) {
        this.root.append(
          historyTable(this.session.history, (entry) => {
            this.shown = entry;
            this.render();
          }),
        );
      }
    }

    if (this.variants.length > 0) {
      this.root.append(variantTable(this.variants, (k) => this.live.get(k)));
    }
  }

  private buildDropzone(): HTMLElement {
    const input = el("input", { type: "file", accept: "image/png,image/jpeg", "data-testid": "file-input" });
    input.addEventListener("change", () => {
      const file = (input as HTMLInputElement).files?.[0];
      if (file) this.upload(file);
    });
    const refInput = el("input", { type: "file", accept: "image/png,image/jpeg", "data-testid": "reference-input" });
    refInput.addEventListener("change", () => {
      this.setReference((refInput as HTMLInputElement).files?.[0] ?? null);
    });

    const zone = el("div", { class: "dropzone", "data-testid": "dropzone" }, [
      el("p", {}, ["drop a degraded image here or use the picker"]),
      el("label", {}, ["image: ", input]),
      el("label", {}, ["clean reference (optional, enables SSIM/PSNR): ", refInput]),
    ]);
    zone.addEventListener("dragover", (event) => event.preventDefault());
    zone.addEventListener("drop", (event) => {
      event.preventDefault();
      const file = (event as DragEvent).dataTransfer?.files?.[0];
      if (file) this.upload(file);
    });
    return zone;
  }
}

export function createApp(root: HTMLElement, api: RestoreApi): App {
  return new App(root, api);
}
