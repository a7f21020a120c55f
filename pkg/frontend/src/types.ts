/** Wire formats of the inference service plus the UI's own view models. */

export interface VariantInfo {
  k: number;
  status: "ready" | "unavailable";
  ssim_reported: number | null;
  psnr_reported: number | null;
  reported_source?: string | null;
}

export interface RestoreResponse {
  job_id: string;
  restored_image_url: string;
  psnr_db?: number;
  ssim?: number;
}

export interface Metrics {
  psnr_db?: number;
  ssim?: number;
}

/** One completed restore of the current upload. */
export interface HistoryEntry {
  variantK: number;
  restoredUrl: string;
  metrics: Metrics;
  requestedAt: number;
}

/** Everything the comparison screen needs for the current upload. */
export interface ComparisonView {
  originalUrl: string;
  restoredUrl: string | null;
  variantK: number | null;
  metrics: Metrics;
  history: HistoryEntry[];
}
