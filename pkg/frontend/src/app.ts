/** Page assembly: plan builder, plan picker, three document panes, span
 * query menu, notices, and the location panel.
 *
 * All traffic goes through one ApiClient, so the request log covers every
 * call the page makes.
 */

import { ApiClient, ApiError, Fetcher } from "./api.js";
import { PlanBuilder } from "./builder.js";
import { DocumentPanes, TokenRef } from "./panes.js";
import { LocationPanel } from "./location.js";
import { spanQueries, SpanQuery } from "./capabilities.js";
import { TaskQueue } from "./queue.js";
import type { AnnotatedBody, Batch } from "./types.js";

export interface AppOptions {
  root: HTMLElement;
  base?: string;
  fetcher?: Fetcher;
  languages?: string[];
  session?: string;
}

const QUERY_LABELS: Record<SpanQuery, string> = {
  antecedent: "what does this refer to?",
  align: "show in other languages",
  location: "where is it?",
};

export class App {
  readonly client: ApiClient;
  readonly builder: PlanBuilder;
  readonly panes: DocumentPanes;
  readonly location: LocationPanel;

  private readonly languages: string[];
  private readonly tasks = new TaskQueue();
  private readonly menuHost: HTMLElement;
  private readonly noticeHost: HTMLElement;
  private readonly planPicker: HTMLSelectElement;
  // language -> stored document id of the batch on screen
  private docIds: Record<string, string> = {};

  constructor(options: AppOptions) {
    this.languages = options.languages ?? ["en", "de", "fr"];
    this.client = options.fetcher
      ? new ApiClient(options.base ?? "", options.fetcher)
      : new ApiClient(options.base ?? "");

    const root = options.root;
    root.classList.add("app");

    const builderHost = document.createElement("section");
    builderHost.className = "builder-host";
    root.appendChild(builderHost);

    const reader = document.createElement("section");
    reader.className = "reader";
    root.appendChild(reader);

    const toolbar = document.createElement("div");
    toolbar.className = "toolbar";
    this.planPicker = document.createElement("select");
    this.planPicker.name = "plan-picker";
    toolbar.appendChild(this.planPicker);
    const show = document.createElement("button");
    show.type = "button";
    show.name = "show-plan";
    show.textContent = "show documents";
    show.addEventListener("click", () => {
      this.tasks.run(() => this.doShowPlan());
    });
    toolbar.appendChild(show);
    reader.appendChild(toolbar);

    const panesHost = document.createElement("div");
    panesHost.className = "panes-host";
    reader.appendChild(panesHost);
    this.panes = new DocumentPanes(panesHost);
    this.panes.onTokenClick((ref) => this.showQueryMenu(ref));

    this.menuHost = document.createElement("div");
    this.menuHost.className = "query-menu";
    this.menuHost.hidden = true;
    reader.appendChild(this.menuHost);

    this.noticeHost = document.createElement("div");
    this.noticeHost.className = "notices";
    reader.appendChild(this.noticeHost);

    const locationHost = document.createElement("div");
    locationHost.className = "location-host";
    reader.appendChild(locationHost);
    this.location = new LocationPanel(locationHost, (path) => this.client.resolve(path));

    this.builder = new PlanBuilder(builderHost, this.client, {
      session: options.session,
      languages: this.languages,
      onGenerated: (batch) => {
        this.tasks.run(() => {
          this.showBatch(batch);
        });
      },
    });
  }

  /** Render the empty panes, the builder form, and the plan picker. */
  async start(): Promise<void> {
    this.panes.render({}, this.languages);
    await this.builder.start();
    this.tasks.run(async () => {
      const list = await this.client.plans();
      const blank = document.createElement("option");
      blank.value = "";
      blank.textContent = "(pick a plan)";
      this.planPicker.appendChild(blank);
      for (const plan of list.plans) {
        const option = document.createElement("option");
        option.value = plan.id;
        option.textContent = `${plan.id} (${plan.target_device})`;
        this.planPicker.appendChild(option);
      }
    });
    await this.flush();
  }

  /** Settles both the builder's and the reader's pending work. */
  async flush(): Promise<void> {
    await this.builder.flush();
    await this.tasks.flush();
  }

  showBatch(batch: Batch): void {
    const bodies: Record<string, AnnotatedBody> = {};
    this.docIds = {};
    for (const language of this.languages) {
      const doc = batch.documents[language];
      if (!doc) continue;
      bodies[language] = JSON.parse(doc.body) as AnnotatedBody;
      this.docIds[language] = doc.id;
    }
    this.panes.render(bodies, this.languages);
    this.menuHost.textContent = "";
    this.menuHost.hidden = true;
    this.noticeHost.textContent = "";
    this.location.clear();
  }

  /* -- span queries; public methods settle before returning ------------- */

  antecedentQuery(language: string, item: number, start: number, end: number): Promise<void> {
    this.tasks.run(() => this.doAntecedent(language, item, start, end));
    return this.flush();
  }

  alignQuery(language: string, item: number, start: number, end: number): Promise<void> {
    this.tasks.run(() => this.doAlign(language, item, start, end));
    return this.flush();
  }

  locationQuery(instance: string): Promise<void> {
    this.tasks.run(() => this.doLocation(instance));
    return this.flush();
  }

  /* -- internals --------------------------------------------------------- */

  private async doShowPlan(): Promise<void> {
    const plan = this.planPicker.value;
    if (plan === "") return;
    try {
      const batch = await this.client.generate({
        plan,
        languages: [...this.languages],
        format: "annotated-json",
        mode: "static",
      });
      this.showBatch(batch);
    } catch (error) {
      if (error instanceof ApiError) {
        this.notice(String(error.detail));
        return;
      }
      throw error;
    }
  }

  /** Offer exactly the queries the clicked token supports. */
  private showQueryMenu(ref: TokenRef): void {
    this.menuHost.textContent = "";
    const queries = spanQueries(ref.token);
    if (queries.length === 0) {
      this.menuHost.hidden = true;
      return;
    }
    this.menuHost.hidden = false;
    const caption = document.createElement("span");
    caption.className = "query-caption";
    caption.textContent = `"${ref.token.surface}"`;
    this.menuHost.appendChild(caption);
    for (const query of queries) {
      const button = document.createElement("button");
      button.type = "button";
      button.name = `query-${query}`;
      button.textContent = QUERY_LABELS[query];
      button.addEventListener("click", () => {
        switch (query) {
          case "antecedent":
            this.tasks.run(() =>
              this.doAntecedent(ref.language, ref.item, ref.token.start, ref.token.end),
            );
            break;
          case "align":
            this.tasks.run(() =>
              this.doAlign(ref.language, ref.item, ref.token.start, ref.token.end),
            );
            break;
          case "location": {
            const instance = ref.token.kb;
            if (instance !== null) {
              this.tasks.run(() => this.doLocation(instance));
            }
            break;
          }
        }
      });
      this.menuHost.appendChild(button);
    }
  }

  private async doAntecedent(
    language: string,
    item: number,
    start: number,
    end: number,
  ): Promise<void> {
    const doc = this.docIds[language];
    if (!doc) return;
    try {
      const answer = await this.client.antecedent(doc, `${item}:${start}:${end}`);
      this.panes.clearHighlights("hl-pronoun", "hl-antecedent");
      this.panes.highlight(language, [[item, start, end]], "hl-pronoun");
      this.panes.highlight(
        language,
        [[answer.antecedent.item, answer.antecedent.start, answer.antecedent.end]],
        "hl-antecedent",
      );
      this.notice(
        `"${answer.pronoun.surface}" refers to ${answer.referent}` +
          ` ("${answer.antecedent.surface}")`,
      );
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        this.notice(`not a pronoun: ${String(error.detail)}`);
        return;
      }
      if (error instanceof ApiError && error.status === 404) {
        this.notice(String(error.detail));
        return;
      }
      throw error;
    }
  }

  private async doAlign(
    language: string,
    item: number,
    start: number,
    end: number,
  ): Promise<void> {
    const doc = this.docIds[language];
    if (!doc) return;
    try {
      const answer = await this.client.align(doc, `${item}:${start}:${end}`);
      this.panes.clearHighlights("hl-origin", "hl-aligned");
      this.panes.highlight(language, [[item, start, end]], "hl-origin");
      for (const [other, spans] of Object.entries(answer.spans)) {
        this.panes.highlight(other, spans, "hl-aligned");
      }
    } catch (error) {
      if (error instanceof ApiError && (error.status === 404 || error.status === 422)) {
        this.notice(String(error.detail));
        return;
      }
      throw error;
    }
  }

  private async doLocation(instance: string): Promise<void> {
    try {
      this.location.show(await this.client.location(instance));
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.location.showNotice(String(error.detail));
        return;
      }
      throw error;
    }
  }

  private notice(text: string): void {
    this.noticeHost.textContent = "";
    const line = document.createElement("p");
    line.className = "notice";
    line.textContent = text;
    this.noticeHost.appendChild(line);
  }
}

export function createApp(options: AppOptions): App {
  return new App(options);
}
