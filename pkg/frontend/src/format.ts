/** Display formatting. Values always come from the API response;
 * nothing here derives new quantities. */

export function formatEffort(personMonths: number): string {
  return `${personMonths.toFixed(1)} person-months`;
}

export function formatSimilarity(similarity: number): string {
  return `${(similarity * 100).toFixed(2)}%`;
}
