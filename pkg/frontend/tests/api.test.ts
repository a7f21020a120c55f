import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient.fetchVariants", () => {
  it("returns the parsed variant list", async () => {
    const variants = [{ k: 25, status: "ready", ssim_reported: 0.9084, psnr_reported: 19.16 }];
    const fetchFn = vi.fn(async () => jsonResponse(variants));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    expect(await client.fetchVariants()).toEqual(variants);
    expect(fetchFn).toHaveBeenCalledWith("/api/variants");
  });

  it("throws ApiRequestError with the service's code on failure", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ code: "boom", message: "backend down" }, 500));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    await expect(client.fetchVariants()).rejects.toMatchObject({
      status: 500,
      code: "boom",
      message: "backend down",
    });
  });
});

describe("ApiClient.restore", () => {
  it("posts multipart form with variant and image", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ job_id: "j", restored_image_url: "/api/artifacts/j" }));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    const result = await client.restore(new Blob(["img"]), 25);

    expect(result.job_id).toBe("j");
    const [url, init] = fetchFn.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/api/restore");
    const form = init.body as FormData;
    expect(form.get("variant")).toBe("25");
    expect(form.get("image")).toBeInstanceOf(Blob);
    expect(form.get("reference")).toBeNull();
  });

  it("includes the reference only when provided", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ job_id: "j", restored_image_url: "/x", psnr_db: 20.0, ssim: 0.9 }));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    const result = await client.restore(new Blob(["img"]), 5, new Blob(["ref"]));
    expect(result.psnr_db).toBe(20.0);
    const form = (fetchFn.mock.calls[0] as unknown as [string, RequestInit])[1].body as FormData;
    expect(form.get("reference")).toBeInstanceOf(Blob);
  });

  it("maps 404 unknown variant errors", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse({ code: "unknown_variant", message: "allowed: [0, 5, 10, 20, 25]" }, 404));
    const client = new ApiClient("", fetchFn as unknown as typeof fetch);
    try {
      await client.restore(new Blob(["img"]), 7);
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiRequestError);
      expect((err as ApiRequestError).code).toBe("unknown_variant");
      expect((err as ApiRequestError).message).toContain("allowed");
    }
  });
});
