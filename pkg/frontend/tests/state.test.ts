import {describe, expect, it} from 'vitest'

import type {JudgingTask} from '../src/api.js'
import {TaskView} from '../src/state.js'

const TASK: JudgingTask = {
  task_id: 'shoes/t1',
  category: 'shoes',
  target_id: 't1',
  candidates: Array.from({length: 14}, (_, i) => `c${i}`),
  display_payloads: {},
}

const GOOD = 'The heel shape and color are close to what I wanted.'

function clock(start = 1000, step = 250) {
  let t = start
  return () => (t += step)
}

describe('TaskView', () => {
  it('starts with nothing selected', () => {
    const view = new TaskView(TASK)
    expect(view.selected()).toEqual([])
  })

  it('toggle selects and deselects', () => {
    const view = new TaskView(TASK)
    expect(view.toggle('c3')).toBe(true)
    expect(view.isSelected('c3')).toBe(true)
    expect(view.toggle('c3')).toBe(false)
    expect(view.selected()).toEqual([])
  })

  it('ignores ids outside the pool', () => {
    const view = new TaskView(TASK)
    expect(view.toggle('not-a-candidate')).toBe(false)
    expect(view.toggle(TASK.target_id)).toBe(false)
    expect(view.selected()).toEqual([])
  })

  it('selection stays within the candidates', () => {
    const view = new TaskView(TASK)
    view.toggle('c1')
    view.toggle('c9')
    for (const id of view.selected()) {
      expect(TASK.candidates).toContain(id)
    }
  })

  it('submission gate mirrors the justification policy', () => {
    const view = new TaskView(TASK)
    view.justification = 'nice'
    expect(view.canSubmit()).toBe(false)
    view.justification = GOOD
    expect(view.canSubmit()).toBe(true)
  })

  it('empty selection with a valid justification is submittable', () => {
    const view = new TaskView(TASK)
    view.justification = GOOD
    expect(view.canSubmit()).toBe(true)
    expect(view.payload('w1').selected).toEqual([])
  })

  it('duration is strictly positive and grows', () => {
    const view = new TaskView(TASK, clock())
    const first = view.elapsedMs()
    expect(first).toBeGreaterThan(0)
    expect(view.elapsedMs()).toBeGreaterThan(first)
  })

  it('payload carries sorted selection and trimmed text', () => {
    const view = new TaskView(TASK, clock())
    view.toggle('c9')
    view.toggle('c2')
    view.justification = `  ${GOOD}  `
    const payload = view.payload('w42')
    expect(payload).toMatchObject({
      worker_id: 'w42',
      target_id: 't1',
      selected: ['c2', 'c9'],
      justification: GOOD,
    })
    expect(payload.duration_ms).toBeGreaterThan(0)
  })
})
