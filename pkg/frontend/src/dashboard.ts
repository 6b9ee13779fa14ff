/**
 * Requester dashboard: source upload, live collection funnel, cost totals,
 * and per-direction export downloads. Pure presentation over the v1 API;
 * the funnel table is rendered verbatim from GET /v1/stats/funnel.
 */

import { ApiClient, ApiError, FunnelStats, IngestReport } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

const FUNNEL_ROWS: [keyof FunnelStats["totals"], string][] = [
  ["translated", "Translated"],
  ["fully_verified", "Verified"],
  ["in_corpus", "In corpus"],
];

export class Dashboard {
  /** Last funnel payload as served; tests compare it against the API. */
  lastFunnel: FunnelStats | null = null;

  constructor(
    private readonly root: HTMLElement,
    readonly api: ApiClient,
  ) {
    this.renderSkeleton();
  }

  private zone(role: string): HTMLElement {
    return this.root.querySelector<HTMLElement>(`[data-role="${role}"]`)!;
  }

  private renderSkeleton(): void {
    this.root.replaceChildren(
      el("h2", {}, ["Collection run"]),
      el("div", { "data-role": "upload-panel" }),
      el("div", { "data-role": "funnel-panel" }),
      el("div", { "data-role": "cost-panel" }),
      el("div", { "data-role": "export-panel" }),
      el("div", { "data-role": "message" }),
    );
    this.renderUploadForm();
  }

  private say(message: string): void {
    this.zone("message").textContent = message;
  }

  private renderUploadForm(): void {
    const direction = el("input", {
      "data-role": "upload-direction",
      placeholder: "direction, e.g. che-rus",
    });
    const origin = el("input", {
      "data-role": "upload-origin",
      placeholder: "origin label",
    });
    const lines = el("textarea", {
      "data-role": "upload-lines",
      placeholder: "one sentence per line",
    });
    const button = el("button", { "data-action": "upload" }, [
      "Upload sources",
    ]);
    button.addEventListener("click", () => {
      void this.upload(
        direction.value.trim(),
        origin.value.trim(),
        lines.value.split("\n").filter((line) => line.trim().length > 0),
      );
    });
    this.zone("upload-panel").replaceChildren(
      el("h3", {}, ["Upload source sentences"]),
      direction,
      origin,
      lines,
      button,
      el("div", { "data-role": "upload-report" }),
    );
  }

  async upload(
    direction: string,
    origin: string,
    lines: string[],
  ): Promise<void> {
    try {
      const result = await this.api.uploadSources(direction, origin, lines);
      this.renderUploadReport(result.report, result.tasks_created);
      await this.refresh();
    } catch (error) {
      this.say(
        error instanceof ApiError
          ? `Upload rejected (${error.status}): ${error.message}`
          : `Upload failed: ${String(error)}`,
      );
    }
  }

  private renderUploadReport(report: IngestReport, tasks: number): void {
    const items: [string, number][] = [
      ["kept", report.kept],
      ["dropped: template", report.dropped_template],
      ["dropped: duplicate", report.dropped_duplicate],
      ["dropped: wrong language", report.dropped_language],
      ["dropped: malformed", report.dropped_malformed],
      ["tasks opened", tasks],
    ];
    this.zone("upload-report").replaceChildren(
      el(
        "ul",
        {},
        items.map(([label, count]) =>
          el("li", { "data-report": label }, [`${label}: ${count}`]),
        ),
      ),
    );
  }

  /** Fetch funnel and cost; rebuild the panels. */
  async refresh(): Promise<void> {
    let funnel: FunnelStats;
    let cost;
    try {
      funnel = await this.api.funnel();
      cost = await this.api.cost();
    } catch (error) {
      this.say(
        error instanceof ApiError
          ? `Refresh failed (${error.status}): ${error.message}`
          : `Refresh failed: ${String(error)}`,
      );
      return;
    }
    this.lastFunnel = funnel;
    this.renderFunnel(funnel);
    this.renderCost(cost.totals);
    this.renderExports(Object.keys(funnel.directions));
  }

  private renderFunnel(funnel: FunnelStats): void {
    const codes = Object.keys(funnel.directions).sort();
    const head = el("tr", {}, [
      el("th", {}, [""]),
      el("th", {}, ["Total"]),
      ...codes.map((code) => el("th", {}, [code])),
    ]);
    const body = FUNNEL_ROWS.map(([key, label]) =>
      el("tr", { "data-funnel-row": key }, [
        el("td", {}, [label]),
        el("td", { "data-cell": `total-${key}` }, [
          String(funnel.totals[key]),
        ]),
        ...codes.map((code) =>
          el("td", { "data-cell": `${code}-${key}` }, [
            String(funnel.directions[code]![key]),
          ]),
        ),
      ]),
    );
    this.zone("funnel-panel").replaceChildren(
      el("h3", {}, ["Funnel"]),
      el("table", { "data-role": "funnel" }, [
        el("thead", {}, [head]),
        el("tbody", {}, body),
      ]),
      el("p", { "data-role": "flags" }, [
        `Trust flags raised: ${funnel.flags_raised}`,
      ]),
    );
  }

  private renderCost(totals: Record<string, string>): void {
    const rows = Object.entries(totals)
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([kind, amount]) =>
        el("li", { "data-cost": kind }, [`${kind}: $${amount}`]),
      );
    this.zone("cost-panel").replaceChildren(
      el("h3", {}, ["Cost"]),
      el("ul", { "data-role": "cost" }, rows),
    );
  }

  private renderExports(codes: string[]): void {
    const links = codes
      .sort()
      .flatMap((code) =>
        (["jsonl", "tsv"] as const).map((format) =>
          el(
            "a",
            {
              "data-export": `${code}.${format}`,
              href: this.api.exportUrl(code, format),
              download: `${code}.${format}`,
            },
            [`${code} (${format})`],
          ),
        ),
      );
    this.zone("export-panel").replaceChildren(
      el("h3", {}, ["Export accepted corpus"]),
      ...links,
    );
  }
}

export function mountDashboard(root: HTMLElement, api: ApiClient): Dashboard {
  return new Dashboard(root, api);
}
