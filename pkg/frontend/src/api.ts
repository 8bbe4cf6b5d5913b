// Typed client over the judging service HTTP API.

export interface JudgingTask {
  task_id: string
  category: string
  target_id: string
  candidates: string[]
  display_payloads: Record<string, string>
}

export interface Ack {
  accepted: boolean
  reason: string | null
}

export interface AnnotationPayload {
  worker_id: string
  target_id: string
  selected: string[]
  justification: string
  duration_ms: number
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message)
  }
}

export class ApiClient {
  constructor(
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private readonly baseUrl: string = '',
  ) {}

  async categories(): Promise<string[]> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/categories`)
    if (!resp.ok) throw new ApiError(`failed to list categories`, resp.status)
    return (await resp.json()) as string[]
  }

  /** Next unjudged task for this worker, or null when the category is done. */
  async nextTask(category: string, worker: string): Promise<JudgingTask | null> {
    const query = new URLSearchParams({category, worker}).toString()
    const resp = await this.fetchImpl(`${this.baseUrl}/api/tasks/next?${query}`)
    if (resp.status === 204) return null
    if (!resp.ok) throw new ApiError(`failed to fetch the next task`, resp.status)
    return (await resp.json()) as JudgingTask
  }

  /**
   * Submit a judgment. Both 200 (accepted) and 422 (rejected, with a reason)
   * resolve to the server's Ack; other statuses throw.
   */
  async submit(payload: AnnotationPayload): Promise<Ack> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/judgments`, {
      method: 'POST',
      headers: {'Content-Type': 'application/json'},
      body: JSON.stringify(payload),
    })
    if (resp.status === 200 || resp.status === 422) {
      return (await resp.json()) as Ack
    }
    throw new ApiError(`submission failed`, resp.status)
  }
}
