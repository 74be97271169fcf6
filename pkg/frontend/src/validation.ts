/**
 * Client-side mirror of the server's annotation record invariants.
 *
 * Every submission passes through validateLabel before any network send;
 * the server re-validates, so this is a UX guard, not the authority.
 */

import { CATEGORIES, FEEDBACK_TYPES, LabelValues } from "./types.js";

export interface FieldError {
  field: keyof LabelValues;
  message: string;
}

const FEEDBACK_SET: ReadonlySet<string> = new Set(FEEDBACK_TYPES);
const CATEGORY_SET: ReadonlySet<string> = new Set(CATEGORIES);

export function validateLabel(values: LabelValues): FieldError[] {
  const errors: FieldError[] = [];
  if (values.applicability) {
    if (!values.feedback_type) {
      errors.push({
        field: "feedback_type",
        message: "an applicable comment needs a feedback type",
      });
    } else if (!FEEDBACK_SET.has(values.feedback_type)) {
      errors.push({
        field: "feedback_type",
        message: `unknown feedback type "${values.feedback_type}"`,
      });
    }
    if (!values.category) {
      errors.push({
        field: "category",
        message: "an applicable comment needs a category",
      });
    } else if (!CATEGORY_SET.has(values.category)) {
      errors.push({
        field: "category",
        message: `unknown category "${values.category}"`,
      });
    }
  } else {
    if (values.feedback_type) {
      errors.push({
        field: "feedback_type",
        message: "feedback type must be empty when not applicable",
      });
    }
    if (values.category) {
      errors.push({
        field: "category",
        message: "category must be empty when not applicable",
      });
    }
  }
  return errors;
}

export function isValidLabel(values: LabelValues): boolean {
  return validateLabel(values).length === 0;
}

/** Thrown by the API client when a payload fails the local mirror check. */
export class ValidationError extends Error {
  readonly errors: FieldError[];

  constructor(errors: FieldError[]) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
    this.name = "ValidationError";
    this.errors = errors;
  }
}
