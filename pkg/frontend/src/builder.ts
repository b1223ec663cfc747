/**
 * Compiles structured query descriptions into command strings.
 *
 * The output must match the service grammar token for token; every shape
 * the builder can emit is covered by a recorded-fixture test.
 */

export type Comparator = "<" | "<=" | "=" | ">" | ">=";
export type Criterion = "fitness" | "dl";

export interface FilterChip {
  field: "size" | "cost" | "parameters";
  op: Comparator;
  bound: number;
}

export interface TopSpec {
  n: number;
  filters?: FilterChip[];
  criterion?: Criterion;
  pattern?: string;
  negated?: boolean;
  rootOnly?: boolean;
}

export interface DistributionSpec {
  sizeOp?: Comparator;
  sizeBound?: number;
  limit?: number;
  by: "count" | "fitness";
  minCount?: number;
  fromTop?: number;
}

export function buildTop(spec: TopSpec): string {
  const parts = [`top ${spec.n}`];
  for (const f of spec.filters ?? []) {
    parts.push(`with ${f.field} ${f.op} ${f.bound}`);
  }
  if (spec.criterion) {
    parts.push(`by ${spec.criterion}`);
  }
  if (spec.pattern) {
    const keyword = spec.negated ? "not matching" : "matching";
    const root = spec.rootOnly ? "root " : "";
    parts.push(`${keyword} ${root}${spec.pattern}`);
  }
  return parts.join(" ");
}

export function buildDistribution(spec: DistributionSpec): string {
  const parts = ["distribution"];
  if (spec.sizeOp !== undefined && spec.sizeBound !== undefined) {
    parts.push(`with size ${spec.sizeOp} ${spec.sizeBound}`);
  }
  if (spec.limit !== undefined) {
    parts.push(`limited at ${spec.limit}`);
  }
  parts.push(`by ${spec.by}`);
  if (spec.minCount !== undefined) {
    parts.push(`with at least ${spec.minCount}`);
  }
  if (spec.fromTop !== undefined) {
    parts.push(`from top ${spec.fromTop}`);
  }
  return parts.join(" ");
}

export function buildPareto(by: Criterion): string {
  return `pareto by ${by}`;
}

/** Pre-fills the command box when a block pattern is clicked. */
export function buildMatchingTop(pattern: string, n = 10): string {
  return buildTop({ n, pattern });
}
