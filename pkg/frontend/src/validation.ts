// Client-side mirror of the service's attention-check policy.
// Keep the two constants in sync with the Python judgments module.
export const MIN_JUSTIFICATION_TOKENS = 5
export const MIN_JUSTIFICATION_CHARS = 20

export interface ValidationResult {
  valid: boolean
  message: string
}

export function validateJustification(text: string): ValidationResult {
  const stripped = text.trim()
  const tokens = stripped.length === 0 ? [] : stripped.split(/\s+/)
  const missingChars = Math.max(0, MIN_JUSTIFICATION_CHARS - stripped.length)
  const missingTokens = Math.max(0, MIN_JUSTIFICATION_TOKENS - tokens.length)
  if (missingChars === 0 && missingTokens === 0) {
    return {valid: true, message: 'Looks good.'}
  }
  const parts: string[] = []
  if (missingTokens > 0) parts.push(`${missingTokens} more word${missingTokens === 1 ? '' : 's'}`)
  if (missingChars > 0) parts.push(`${missingChars} more character${missingChars === 1 ? '' : 's'}`)
  return {
    valid: false,
    message: `Please answer with a full sentence (${parts.join(' and ')} needed).`,
  }
}
