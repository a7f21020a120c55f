import { ApiRequestError } from "./api.js";
import type { RestoreApi } from "./api.js";
import type { ComparisonView, HistoryEntry, Metrics, VariantInfo } from "./types.js";

export type Listener = () => void;

/**
 * Restores of one uploaded image across variant choices.
 *
 * Exactly one request is in flight at a time; further submissions queue in
 * order. Every successful restore appends a history row so variants can be
 * compared on the same upload. Metrics are copied verbatim from the API
 * response and only when present; the UI never computes or invents them.
 */
export class RestoreSession {
  readonly history: HistoryEntry[] = [];
  current: HistoryEntry | null = null;
  error: string | null = null;
  busy = false;
  private queue: number[] = [];
  private listeners: Listener[] = [];

  constructor(
    private readonly api: RestoreApi,
    readonly image: Blob,
    readonly originalUrl: string,
    readonly reference: Blob | null = null,
    private readonly now: () => number = Date.now,
  ) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  get pending(): readonly number[] {
    return this.queue;
  }

  get view(): ComparisonView {
    return {
      originalUrl: this.originalUrl,
      restoredUrl: this.current?.restoredUrl ?? null,
      variantK: this.current?.variantK ?? null,
      metrics: this.current?.metrics ?? {},
      history: [...this.history],
    };
  }

  /** Queue a restore with variant K; resolves when that request settles. */
  request(variantK: number): Promise<void> {
    this.queue.push(variantK);
    return this.pump();
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  private async pump(): Promise<void> {
    if (this.busy) return;
    const variantK = this.queue.shift();
    if (variantK === undefined) return;
    this.busy = true;
    this.emit();
    try {
      const res = await this.api.restore(this.image, variantK, this.reference);
      const metrics: Metrics = {};
      if (res.psnr_db !== undefined) metrics.psnr_db = res.psnr_db;
      if (res.ssim !== undefined) metrics.ssim = res.ssim;
      const entry: HistoryEntry = {
        variantK,
        restoredUrl: res.restored_image_url,
        metrics,
        requestedAt: this.now(),
      };
      this.history.push(entry);
      this.current = entry;
      this.error = null;
    } catch (err) {
      this.error =
        err instanceof ApiRequestError
          ? `${err.message} (${err.code})`
          : `restore failed: ${String(err)}`;
    } finally {
      this.busy = false;
      this.emit();
      void this.pump();
    }
  }
}

/** Latest live metrics per variant, shown beside the paper-reported numbers. */
export class LiveMetricsStore {
  private byVariant = new Map<number, Metrics>();

  record(entry: HistoryEntry): void {
    if (entry.metrics.psnr_db === undefined && entry.metrics.ssim === undefined) return;
    this.byVariant.set(entry.variantK, entry.metrics);
  }

  get(k: number): Metrics | undefined {
    return this.byVariant.get(k);
  }
}

export function variantAvailable(variants: VariantInfo[], k: number): boolean {
  return variants.some((v) => v.k === k && v.status === "ready");
}
