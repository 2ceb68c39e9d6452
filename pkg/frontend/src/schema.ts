export const REQUIRED_COLUMNS = [
  "axis",
  "algorithm",
  "seed",
  "accepted_full",
  "accepted_mand",
  "rejected",
  "profit",
  "profit_norm",
  "mean_link_util",
  "mean_node_util",
  "J",
  "D",
] as const;

export class SchemaError extends Error {
  constructor(missing: string[]) {
    super(`results CSV is missing column(s): ${missing.join(", ")}`);
    this.name = "SchemaError";
  }
}

export interface ResultRow {
  axis: string;
  algorithm: string;
  seed: number;
  profit: number;
  profit_norm: number;
  mean_link_util: number;
  mean_node_util: number;
  J: number;
  D: number;
}

export interface RunMetadata {
  axis?: string;
  values?: unknown[];
  normalization?: string;
  config?: { k?: number; [key: string]: unknown };
  [key: string]: unknown;
}

export function checkColumns(fields: string[] | undefined): void {
  const present = new Set(fields ?? []);
  const missing = REQUIRED_COLUMNS.filter((c) => !present.has(c));
  if (missing.length > 0) {
    throw new SchemaError(missing);
  }
}
