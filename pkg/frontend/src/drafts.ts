/**
 * Draft retention across network loss.
 *
 * A submission that fails with a network-level error (fetch rejection,
 * not an HTTP status) stays queued locally and is resent by flush() once
 * the service is reachable again. HTTP rejections are the caller's
 * problem: the server saw the payload and said no.
 */

import { ApiClient, ApiError } from "./api.js";
import { LabelSubmission, SubmitResult } from "./types.js";

export interface SubmitOutcome {
  sent: boolean;
  result?: SubmitResult;
}

export class DraftQueue {
  private readonly client: ApiClient;
  private readonly sessionId: string;
  private pending: LabelSubmission[] = [];

  constructor(client: ApiClient, sessionId: string) {
    this.client = client;
    this.sessionId = sessionId;
  }

  get size(): number {
    return this.pending.length;
  }

  drafts(): readonly LabelSubmission[] {
    return this.pending;
  }

  /** Submit now; on network loss keep the draft and report sent: false. */
  async submit(submission: LabelSubmission): Promise<SubmitOutcome> {
    try {
      const result = await this.client.submitLabel(this.sessionId, submission);
      return { sent: true, result };
    } catch (err) {
      if (err instanceof ApiError || err instanceof Error && err.name === "ValidationError") {
        throw err;
      }
      this.pending.push(submission);
      return { sent: false };
    }
  }

  /** Resend queued drafts in order; stops at the first network failure. */
  async flush(): Promise<number> {
    let sent = 0;
    while (this.pending.length > 0) {
      const draft = this.pending[0]!;
      try {
        await this.client.submitLabel(this.sessionId, draft);
      } catch (err) {
        if (err instanceof ApiError) {
          // The server judged the draft itself; keeping it would wedge
          // the queue forever.
          this.pending.shift();
          throw err;
        }
        return sent;
      }
      this.pending.shift();
      sent += 1;
    }
    return sent;
  }
}
