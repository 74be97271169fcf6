import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  extractKappaTexts,
  formatKappa,
  renderAdjudication,
  renderDashboard,
  renderItem,
} from "../src/render.js";
import { AgreementPayload, ItemView, KappaCell } from "../src/types.js";

function cell(kappa: number): KappaCell {
  return { kappa, observed: 1, expected: 0, items: 10 };
}

function payload(dimensions: AgreementPayload["dimensions"]): AgreementPayload {
  return {
    session_id: "sess-1",
    units: 10,
    dimensions,
    batches: [{ items: 10, dimensions }],
    cumulative: [{ items: 10, dimensions }],
  };
}

describe("dashboard", () => {
  it("renders each kappa exactly as the server sent it", () => {
    const dims = {
      semantic_equivalence: cell(0.4),
      applicability: cell(1),
      has_explanation: cell(-0.25),
      feedback_type: cell(0.6521739130434783),
      category: null,
    };
    const html = renderDashboard(payload(dims));
    const texts = extractKappaTexts(html);
    for (const [dimension, value] of Object.entries(dims)) {
      expect(texts[dimension]).toBe(value === null ? "n/a" : String(value.kappa));
    }
  });

  it("perfect agreement renders the payload value, not a reformat", () => {
    const html = renderDashboard(payload({ applicability: cell(1) }));
    expect(extractKappaTexts(html)["applicability"]).toBe("1");
  });

  it("uncomputable dimensions show n/a and never 0", () => {
    const html = renderDashboard(payload({ category: null }));
    const text = extractKappaTexts(html)["category"];
    expect(text).toBe("n/a");
    expect(text).not.toBe("0");
  });

  it("flags dimensions under the attention threshold", () => {
    const html = renderDashboard(
      payload({ applicability: cell(0.2), category: cell(0.9) }),
      0.4,
    );
    const attentionRows = html
      .split("<tr")
      .filter((chunk) => chunk.startsWith(' class="attention"'));
    expect(attentionRows).toHaveLength(1);
    expect(attentionRows[0]).toContain("applicability");
    expect(attentionRows[0]).not.toContain("category");
  });

  it("n/a is never flagged for attention", () => {
    const html = renderDashboard(payload({ category: null }), 0.4);
    expect(html).not.toContain('class="attention"');
  });

  it("renders one batch row per batch", () => {
    const dims = { applicability: cell(0.5) };
    const body = payload(dims);
    body.batches = [
      { items: 10, dimensions: { applicability: cell(0.4) } },
      { items: 5, dimensions: { applicability: null } },
    ];
    const html = renderDashboard(body);
    expect(html).toContain("batch 1 (10 items)");
    expect(html).toContain("batch 2 (5 items)");
  });
});

const ITEM: ItemView = {
  index: 3,
  sample_id: "s17",
  m_pre: "def add(a, b):\n    return a + b",
  reference: "Use <kwargs> & type hints.",
  candidates: [
    { alias: "A", text: "Consider adding type hints." },
    { alias: "B", text: "Looks good." },
  ],
};

describe("item view", () => {
  it("never displays model identity", () => {
    const html = renderItem(ITEM);
    for (const name of ["sys-alpha", "sys-beta", "model", "gpt", "llama"]) {
      expect(html.toLowerCase()).not.toContain(name);
    }
    expect(html).toContain("Comment A");
    expect(html).toContain("Comment B");
  });

  it("numbers the code lines in a monospace table", () => {
    const html = renderItem(ITEM);
    expect(html).toContain('<table class="code">');
    expect(html).toContain('<td class="ln">1</td>');
    expect(html).toContain('<td class="ln">2</td>');
    expect(html).toContain("def add(a, b):");
  });

  it("escapes markup in code and comments", () => {
    const html = renderItem({
      ...ITEM,
      m_pre: "if a < b:\n    pass",
      reference: "<script>alert(1)</script>",
    });
    expect(html).toContain("if a &lt; b:");
    expect(html).toContain("&lt;script&gt;alert(1)&lt;/script&gt;");
    expect(html).not.toContain("<script>alert(1)</script>");
  });

  it("disables feedback and category until applicability is checked", () => {
    const html = renderItem(ITEM);
    const selects = html.match(/<select[^>]*>/g) ?? [];
    expect(selects).toHaveLength(4);
    for (const tag of selects) {
      expect(tag).toContain(" disabled");
    }
    const withDraft = renderItem(ITEM, { A: { applicability: true } });
    const enabled = (withDraft.match(/<select[^>]*data-alias="A"[^>]*>/g) ?? []).filter(
      (tag) => !tag.includes(" disabled"),
    );
    expect(enabled).toHaveLength(2);
  });

  it("shows prior labels during the review pass", () => {
    const html = renderItem({
      ...ITEM,
      prior_labels: {
        A: {
          semantic_equivalence: true,
          applicability: true,
          has_explanation: false,
          feedback_type: "suggestion",
          category: "naming_convention",
        },
      },
    });
    expect(html).toContain("first pass labels");
    expect(html).toContain("suggestion");
  });
});

describe("adjudication view", () => {
  it("shows both annotators side by side and marks the differing dimension", () => {
    const html = renderAdjudication([
      {
        item_id: "s17/A",
        kind: "cal",
        sample_id: "s17",
        alias: "A",
        dimensions: ["semantic_equivalence"],
        labels: {
          "ann-a": {
            semantic_equivalence: true,
            applicability: false,
            has_explanation: false,
            feedback_type: null,
            category: null,
          },
          "ann-b": {
            semantic_equivalence: false,
            applicability: false,
            has_explanation: false,
            feedback_type: null,
            category: null,
          },
        },
        resolution: null,
      },
    ]);
    expect(html).toContain("ann-a");
    expect(html).toContain("ann-b");
    expect(html).toContain("differs on: semantic equivalence");
    expect(html).toContain('class="differs"');
    expect(html).toContain('<div class="resolution" data-item-id="s17/A">');
  });

  it("renders resolved items without a form", () => {
    const html = renderAdjudication([
      {
        item_id: "s17/A",
        kind: "cal",
        sample_id: "s17",
        alias: "A",
        dimensions: ["applicability"],
        labels: {},
        resolution: {
          semantic_equivalence: false,
          applicability: false,
          has_explanation: false,
          feedback_type: null,
          category: null,
        },
      },
    ]);
    expect(html).toContain("resolved");
    expect(html).not.toContain('class="resolution"');
  });
});

describe("formatKappa", () => {
  it("passes numbers through String()", () => {
    expect(formatKappa(cell(0.4))).toBe("0.4");
    expect(formatKappa(cell(1))).toBe("1");
    expect(formatKappa(cell(-1))).toBe("-1");
  });

  it("maps null to n/a", () => {
    expect(formatKappa(null)).toBe("n/a");
  });
});

describe("escapeHtml", () => {
  it("escapes the five significant characters", () => {
    expect(escapeHtml(`<a href="x">&'</a>`)).toBe(
      "&lt;a href=&quot;x&quot;&gt;&amp;&#39;&lt;/a&gt;",
    );
  });
});
