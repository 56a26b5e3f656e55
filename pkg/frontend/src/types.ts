/** Payload shapes exchanged with the generation service over HTTP. */

export interface MenuOption {
  id: string;
  concept: string;
}

/** GET /menu answer; `freeform` appears only for literal-valued roles. */
export interface Menu {
  context: { role: string; range: string } | { concept: string };
  options: MenuOption[];
  freeform?: boolean;
}

export interface PlanSummary {
  id: string;
  target_device: string;
}

export interface PlanList {
  device: string | null;
  plans: PlanSummary[];
}

/** One token of an annotated sentence; start/end index into the sentence text. */
export interface Token {
  surface: string;
  start: number;
  end: number;
  kb: string | null;
  plan: number | null;
  pronoun: boolean;
  role: string | null;
  sep: string;
}

export type Item =
  | { kind: "heading"; payload: string; text: string }
  | { kind: "sentence"; language: string; plan: number; text: string; tokens: Token[] }
  | { kind: "paragraph-break" }
  | { kind: "list-begin"; payload: string }
  | { kind: "list-item" }
  | { kind: "list-end"; payload: string };

/** Parsed body of an annotated-json document. */
export interface AnnotatedBody {
  format_version: number;
  language: string;
  plan: string;
  digest: string;
  items: Item[];
}

export interface BatchDocument {
  id: string;
  format: string;
  body: string;
}

/** POST /generate answer: one document per requested language. */
export interface Batch {
  batch: string;
  plan: string;
  mode: string;
  digest: string;
  documents: Record<string, BatchDocument>;
}

export interface SpanRef {
  item: number;
  start: number;
  end: number;
  surface: string;
}

export interface AntecedentAnswer {
  referent: string;
  pronoun: SpanRef;
  antecedent: SpanRef;
}

/** [item index, start, end] within a document of one language. */
export type AlignedSpan = [number, number, number];

export interface AlignAnswer {
  referent?: string;
  plan?: number;
  language: string;
  spans: Record<string, AlignedSpan[]>;
}

export interface Rectangle {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface LocationAnswer {
  instance: string;
  illustration: string;
  image: string | null;
  url: string | null;
  rectangle: Rectangle;
  caption: string | null;
}

export interface Diagnostic {
  severity: string;
  code: string;
  message: string;
}

export interface DraftAccepted {
  session: string;
  plan: string;
  diagnostics: Diagnostic[];
}

/** 409 detail payload when a drafted plan fails validation. */
export interface DraftRejection {
  plan: string;
  diagnostics: Diagnostic[];
}

export interface GenerateRequest {
  plan: string;
  languages: string[];
  format: string;
  mode: string;
  session?: string;
}

/* Plan drafts use the knowledge-base plan JSON with hyphenated keys. */

export interface FillerAtom {
  atom: "filler";
  x: string;
  role: string;
  y: string;
}

export interface FillerAssertion {
  assert: "filler";
  instance: string;
  role: string;
  value: string;
}

export interface ActionStep {
  step: "action";
  id: string;
  category: string;
  process: string;
  participants: Record<string, string>;
  preconditions?: FillerAtom[][];
  postconditions?: FillerAssertion[];
  refinement?: string;
}

export interface ConditionalStep {
  step: "conditional";
  condition: FillerAtom[];
  then: PlanStep[];
  else: PlanStep[];
}

export type PlanStep = ActionStep | ConditionalStep;

export interface PlanDraft {
  id: string;
  "target-device": string;
  goal: FillerAtom[];
  "location-info"?: string;
  "replacement-items"?: string[];
  steps: PlanStep[];
}
