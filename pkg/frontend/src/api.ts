import type { RestoreResponse, VariantInfo } from "./types.js";

/** Error carrying the service's machine-readable code alongside the message. */
export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

async function throwFromResponse(response: Response): Promise<never> {
  let code = "http_error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body === "object") {
      code = body.code ?? body.detail?.code ?? code;
      message = body.message ?? body.detail?.message ?? message;
    }
  } catch {
    // non-JSON error body: keep the generic message
  }
  throw new ApiRequestError(response.status, code, message);
}

/** What the app needs from the backend; ApiClient is the HTTP implementation. */
export interface RestoreApi {
  fetchVariants(): Promise<VariantInfo[]>;
  restore(image: Blob, variantK: number, reference?: Blob | null): Promise<RestoreResponse>;
}

export class ApiClient implements RestoreApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async fetchVariants(): Promise<VariantInfo[]> {
    const response = await this.fetchFn(`${this.baseUrl}/api/variants`);
    if (!response.ok) await throwFromResponse(response);
    return (await response.json()) as VariantInfo[];
  }

  async restore(image: Blob, variantK: number, reference?: Blob | null): Promise<RestoreResponse> {
    const form = new FormData();
    form.append("image", image, "upload.png");
    form.append("variant", String(variantK));
    if (reference) {
      form.append("reference", reference, "reference.png");
    }
    const response = await this.fetchFn(`${this.baseUrl}/api/restore`, {
      method: "POST",
      body: form,
    });
    if (!response.ok) await throwFromResponse(response);
    return (await response.json()) as RestoreResponse;
  }
}
