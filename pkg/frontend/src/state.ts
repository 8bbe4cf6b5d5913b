import type {AnnotationPayload, JudgingTask} from './api.js'
import {validateJustification} from './validation.js'

/**
 * Selection + justification state for one judging task.
 *
 * The selection can only ever contain pooled candidates, the timer is
 * monotonic, and submission is allowed exactly when the justification passes
 * the shared policy (an empty selection is fine: "none of these fits" is a
 * valid judgment).
 */
export class TaskView {
  private readonly selection = new Set<string>()
  private readonly startedAt: number
  justification = ''

  constructor(
    readonly task: JudgingTask,
    private readonly now: () => number = () => Date.now(),
  ) {
    this.startedAt = this.now()
  }

  /** Toggle a candidate; returns its new state. Unknown ids are ignored. */
  toggle(candidateId: string): boolean {
    if (!this.task.candidates.includes(candidateId)) return false
    if (this.selection.has(candidateId)) {
      this.selection.delete(candidateId)
      return false
    }
    this.selection.add(candidateId)
    return true
  }

  isSelected(candidateId: string): boolean {
    return this.selection.has(candidateId)
  }

  selected(): string[] {
    return [...this.selection].sort()
  }

  elapsedMs(): number {
    return Math.max(1, this.now() - this.startedAt)
  }

  canSubmit(): boolean {
    return validateJustification(this.justification).valid
  }

  payload(workerId: string): AnnotationPayload {
    return {
      worker_id: workerId,
      target_id: this.task.target_id,
      selected: this.selected(),
      justification: this.justification.trim(),
      duration_ms: this.elapsedMs(),
    }
  }
}
