/** Which span queries a token supports. */

import type { Token } from "./types.js";

export type SpanQuery = "antecedent" | "align" | "location";

/** Pronouns answer antecedent; referent-bearing tokens answer alignment and
 * location.  Function words carry only a sentence-plan id and get no menu,
 * even though the service could align them by plan. */
export function spanQueries(token: Token): SpanQuery[] {
  const queries: SpanQuery[] = [];
  if (token.pronoun) {
    queries.push("antecedent");
  }
  if (token.kb !== null) {
    queries.push("align", "location");
  }
  return queries;
}
