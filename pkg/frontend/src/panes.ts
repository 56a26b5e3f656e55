/** Side-by-side rendering of one generated document per language.
 *
 * Sentences become paragraphs of token spans; the gaps between tokens are
 * copied verbatim from the sentence text, so each paragraph's text content
 * reproduces the plain sentence exactly.
 */

import type { AlignedSpan, AnnotatedBody, Item, Token } from "./types.js";

export interface TokenRef {
  language: string;
  item: number;
  token: Token;
  element: HTMLElement;
}

export type TokenClickHandler = (ref: TokenRef) => void;

export class DocumentPanes {
  private readonly panes = new Map<string, HTMLElement>();
  private refs = new Map<HTMLElement, TokenRef>();
  private handler: TokenClickHandler | null = null;

  constructor(private readonly root: HTMLElement) {
    root.classList.add("panes");
    root.addEventListener("click", (event) => {
      const target = event.target;
      if (!(target instanceof HTMLElement)) return;
      const ref = this.refs.get(target);
      if (ref && this.handler) this.handler(ref);
    });
  }

  onTokenClick(handler: TokenClickHandler): void {
    this.handler = handler;
  }

  /** Replace all panes; `languages` fixes the left-to-right order. */
  render(bodies: Record<string, AnnotatedBody>, languages: string[]): void {
    this.root.textContent = "";
    this.panes.clear();
    this.refs = new Map();
    for (const language of languages) {
      const pane = document.createElement("section");
      pane.className = "pane";
      pane.dataset.language = language;
      const body = bodies[language];
      if (body) this.renderItems(pane, body, language);
      this.root.appendChild(pane);
      this.panes.set(language, pane);
    }
  }

  private renderItems(pane: HTMLElement, body: AnnotatedBody, language: string): void {
    // list-item markers introduce the next sentence; sentences in between
    // attach to the open <li>, everything else to the pane itself.
    let list: HTMLOListElement | null = null;
    let entry: HTMLLIElement | null = null;
    body.items.forEach((item: Item, index: number) => {
      switch (item.kind) {
        case "heading": {
          const heading = document.createElement("h2");
          heading.textContent = item.text;
          pane.appendChild(heading);
          break;
        }
        case "sentence": {
          const paragraph = document.createElement("p");
          paragraph.className = "sentence";
          paragraph.dataset.item = String(index);
          this.renderSentence(paragraph, item.text, item.tokens, index, language);
          (entry ?? pane).appendChild(paragraph);
          break;
        }
        case "list-begin": {
          list = document.createElement("ol");
          pane.appendChild(list);
          break;
        }
        case "list-item": {
          entry = document.createElement("li");
          (list ?? pane).appendChild(entry);
          break;
        }
        case "list-end": {
          list = null;
          entry = null;
          break;
        }
        case "paragraph-break":
          break;
      }
    });
  }

  private renderSentence(
    parent: HTMLElement,
    text: string,
    tokens: Token[],
    itemIndex: number,
    language: string,
  ): void {
    // token offsets count code points, so slice over code points rather
    // than UTF-16 units
    const chars = Array.from(text);
    const slice = (from: number, to: number) => chars.slice(from, to).join("");
    let cursor = 0;
    for (const token of tokens) {
      if (token.start > cursor) {
        parent.appendChild(document.createTextNode(slice(cursor, token.start)));
      }
      const span = document.createElement("span");
      span.className = "token";
      span.textContent = slice(token.start, token.end);
      span.dataset.item = String(itemIndex);
      span.dataset.start = String(token.start);
      span.dataset.end = String(token.end);
      span.dataset.language = language;
      if (token.kb !== null) span.dataset.kb = token.kb;
      if (token.plan !== null) span.dataset.plan = String(token.plan);
      if (token.pronoun) span.dataset.pronoun = "true";
      parent.appendChild(span);
      this.refs.set(span, { language, item: itemIndex, token, element: span });
      cursor = token.end;
    }
    if (cursor < chars.length) {
      parent.appendChild(document.createTextNode(slice(cursor, chars.length)));
    }
  }

  /** The token element rendered at exactly this span, if any. */
  tokenAt(language: string, item: number, start: number, end: number): HTMLElement | null {
    const pane = this.panes.get(language);
    if (!pane) return null;
    const selector =
      `.token[data-item="${item}"][data-start="${start}"][data-end="${end}"]`;
    return pane.querySelector<HTMLElement>(selector);
  }

  /** Mark every token covered by one of the spans. */
  highlight(language: string, spans: AlignedSpan[], cssClass: string): void {
    const pane = this.panes.get(language);
    if (!pane) return;
    for (const [item, start, end] of spans) {
      const tokens = pane.querySelectorAll<HTMLElement>(
        `.token[data-item="${item}"]`,
      );
      for (const element of tokens) {
        const tokenStart = Number(element.dataset.start);
        const tokenEnd = Number(element.dataset.end);
        if (tokenStart >= start && tokenEnd <= end) {
          element.classList.add(cssClass);
        }
      }
    }
  }

  clearHighlights(...cssClasses: string[]): void {
    for (const cssClass of cssClasses) {
      for (const element of this.root.querySelectorAll("." + cssClass)) {
        element.classList.remove(cssClass);
      }
    }
  }

  languages(): string[] {
    return [...this.panes.keys()];
  }
}
