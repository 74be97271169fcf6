/**
 * Thin fetch wrapper over the annotation service.
 *
 * One method per endpoint, no payload transformation beyond JSON. Label
 * submissions and resolutions are validated locally first and never sent
 * when invalid.
 */

import {
  AdjudicationView,
  AgreementPayload,
  LabelSubmission,
  LabelValues,
  NextPayload,
  SessionInfo,
  SubmitResult,
} from "./types.js";
import { ValidationError, validateLabel } from "./validation.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = (u, i) => fetch(u, i)) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const payload = text ? JSON.parse(text) : null;
    if (!resp.ok) {
      const detail =
        payload && typeof payload.detail === "string"
          ? payload.detail
          : JSON.stringify(payload?.detail ?? text);
      throw new ApiError(resp.status, detail);
    }
    return payload as T;
  }

  health(): Promise<{ status: string; sessions: number }> {
    return this.request("GET", "/health");
  }

  createSession(
    frame: string,
    annotators: string[],
    calibrationSize: number,
  ): Promise<{ session_id: string; phase: string }> {
    return this.request("POST", "/sessions", {
      frame,
      annotators,
      calibration_size: calibrationSize,
    });
  }

  session(sessionId: string): Promise<SessionInfo> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  nextItem(sessionId: string, annotator: string): Promise<NextPayload> {
    return this.request(
      "GET",
      `/sessions/${sessionId}/next?annotator=${encodeURIComponent(annotator)}`,
    );
  }

  async submitLabel(sessionId: string, submission: LabelSubmission): Promise<SubmitResult> {
    const errors = validateLabel(submission);
    if (errors.length > 0) {
      throw new ValidationError(errors);
    }
    return this.request("POST", `/sessions/${sessionId}/labels`, submission);
  }

  agreement(sessionId: string): Promise<AgreementPayload> {
    return this.request("GET", `/sessions/${sessionId}/agreement`);
  }

  adjudications(sessionId: string): Promise<{ items: AdjudicationView[] }> {
    return this.request("GET", `/sessions/${sessionId}/adjudications`);
  }

  async resolve(
    sessionId: string,
    itemId: string,
    resolution: LabelValues,
  ): Promise<{ ok: boolean; phase: string }> {
    const errors = validateLabel(resolution);
    if (errors.length > 0) {
      throw new ValidationError(errors);
    }
    return this.request(
      "POST",
      `/sessions/${sessionId}/adjudications/${encodeURIComponent(itemId)}/resolve`,
      resolution,
    );
  }

  /** Agreement payload as raw bytes, for render-exactness checks. */
  async agreementText(sessionId: string): Promise<string> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/agreement`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }
}
