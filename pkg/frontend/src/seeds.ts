// Seed draft assembled in the browser before a run is launched. The draft
// mirrors the server's seed invariants client-side: K buckets, buckets
// disjoint, every id present in the selected graph. Launch stays disabled
// while any of those is violated, so an invalid draft is never submitted.

export interface SeedDraft {
  k: number;
  buckets: string[][];
}

export interface DraftCheck {
  ok: boolean;
  problems: string[];
  warnings: string[];
}

export function createDraft(k: number): SeedDraft {
  return { k, buckets: Array.from({ length: k }, () => []) };
}

/** Change K in place-preserving fashion: existing buckets survive a grow,
 *  a shrink drops the trailing buckets (their ids become unassigned). */
export function resizeDraft(draft: SeedDraft, k: number): SeedDraft {
  const buckets = Array.from({ length: k }, (_, i) =>
    i < draft.buckets.length ? [...draft.buckets[i]] : [],
  );
  return { k, buckets };
}

export function bucketOf(draft: SeedDraft, id: string): number | null {
  for (let i = 0; i < draft.buckets.length; i++) {
    if (draft.buckets[i].includes(id)) return i;
  }
  return null;
}

/** Assign an id to a bucket. Dropping a node that already sits in another
 *  bucket moves it: the previous membership is removed first, keeping the
 *  buckets disjoint by construction. Re-dropping into the same bucket is a
 *  no-op. */
export function assign(draft: SeedDraft, bucket: number, id: string): SeedDraft {
  if (bucket < 0 || bucket >= draft.k) return draft;
  const buckets = draft.buckets.map((b) => b.filter((x) => x !== id));
  buckets[bucket].push(id);
  return { k: draft.k, buckets };
}

export function unassign(draft: SeedDraft, id: string): SeedDraft {
  return { k: draft.k, buckets: draft.buckets.map((b) => b.filter((x) => x !== id)) };
}

export function seedCount(draft: SeedDraft): number {
  return draft.buckets.reduce((n, b) => n + b.length, 0);
}

/** Validate against the ids of the selected graph. Returns every problem,
 *  not just the first, so the editor can list them all. Problems block
 *  launch; warnings flag drafts the server accepts but the run rejects at
 *  start (a mix of filled and empty buckets). */
export function checkDraft(draft: SeedDraft, graphIds: Set<string>): DraftCheck {
  const problems: string[] = [];
  const warnings: string[] = [];
  if (draft.buckets.length !== draft.k) {
    problems.push(`draft has ${draft.buckets.length} buckets for k=${draft.k}`);
  }
  const seen = new Map<string, number>();
  draft.buckets.forEach((bucket, i) => {
    for (const id of bucket) {
      const prev = seen.get(id);
      if (prev !== undefined && prev !== i) {
        problems.push(`${id} appears in buckets ${prev} and ${i}`);
      }
      seen.set(id, i);
      if (!graphIds.has(id)) {
        problems.push(`${id} is not a node of the selected graph`);
      }
    }
  });
  const filled = draft.buckets.filter((b) => b.length > 0).length;
  if (filled > 0 && filled < draft.buckets.length) {
    warnings.push(
      "some buckets are empty; seeded runs need every bucket filled (or all empty)",
    );
  }
  return { ok: problems.length === 0, problems, warnings };
}

/** The wire form POST /runs expects. Empty drafts submit as no seeds at all
 *  rather than K empty lists, which the server reads the same way. */
export function toPayload(draft: SeedDraft): string[][] | undefined {
  return seedCount(draft) === 0 ? undefined : draft.buckets.map((b) => [...b]);
}
