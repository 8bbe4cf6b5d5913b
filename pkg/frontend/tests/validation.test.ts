import {describe, expect, it} from 'vitest'

import {
  MIN_JUSTIFICATION_CHARS,
  MIN_JUSTIFICATION_TOKENS,
  validateJustification,
} from '../src/validation.js'

describe('validateJustification', () => {
  it('accepts a full sentence', () => {
    const result = validateJustification('I like the similar color and heel shape.')
    expect(result.valid).toBe(true)
  })

  it('rejects a one-word answer', () => {
    const result = validateJustification('nice')
    expect(result.valid).toBe(false)
    expect(result.message).toMatch(/full sentence/)
  })

  it('rejects five tokens under the character floor', () => {
    const text = 'a b c d efghijklmno'
    expect(text.length).toBe(19)
    expect(text.split(/\s+/).length).toBe(5)
    expect(validateJustification(text).valid).toBe(false)
  })

  it('accepts exactly the boundary', () => {
    const text = 'a b c d efghijklmnop'
    expect(text.length).toBe(MIN_JUSTIFICATION_CHARS)
    expect(text.split(/\s+/).length).toBe(MIN_JUSTIFICATION_TOKENS)
    expect(validateJustification(text).valid).toBe(true)
  })

  it('rejects many characters with too few words', () => {
    expect(validateJustification('aaaaaaaaaaaaaaaaaaaaaaaaaaaa').valid).toBe(false)
  })

  it('ignores surrounding whitespace', () => {
    expect(validateJustification('   nice   \n').valid).toBe(false)
    expect(validateJustification('  the heel shape looks right to me  ').valid).toBe(true)
  })

  it('reports what is missing', () => {
    const result = validateJustification('too short')
    expect(result.message).toMatch(/\d+ more word/)
  })
})
