import {describe, expect, it} from 'vitest'

import {ApiClient, type Ack, type JudgingTask} from '../src/api.js'
import {TaskView} from '../src/state.js'
import {validateJustification} from '../src/validation.js'

const TASK: JudgingTask = {
  task_id: 'shoes/t1',
  category: 'shoes',
  target_id: 't1',
  candidates: Array.from({length: 14}, (_, i) => `c${i}`),
  display_payloads: {t1: 'synthetic:t1'},
}

const GOOD = 'The color and general style match what I had in mind.'

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: {'Content-Type': 'application/json'},
  })
}

/** Miniature judging service: one target, duplicate detection, policy check. */
function fakeService() {
  const submissions: Array<Record<string, unknown>> = []
  let served = 0
  const fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, 'http://service')
    if (url.pathname === '/api/categories') return jsonResponse(['shoes'])
    if (url.pathname === '/api/tasks/next') {
      if (served > 0) return new Response(null, {status: 204})
      served += 1
      return jsonResponse(TASK)
    }
    if (url.pathname === '/api/judgments' && init?.method === 'POST') {
      const body = JSON.parse(String(init.body)) as Record<string, unknown>
      const text = String(body.justification ?? '')
      if (text.trim().split(/\s+/).length < 5 || text.trim().length < 20) {
        return jsonResponse({accepted: false, reason: 'attention check failed'} as Ack, 422)
      }
      if (submissions.some(s => s.worker_id === body.worker_id && s.target_id === body.target_id)) {
        return jsonResponse({accepted: false, reason: 'already judged'} as Ack, 422)
      }
      submissions.push(body)
      return jsonResponse({accepted: true, reason: null} as Ack)
    }
    return new Response('not found', {status: 404})
  }
  return {fetchImpl, submissions}
}

describe('ApiClient', () => {
  it('fetches the next task', async () => {
    const {fetchImpl} = fakeService()
    const client = new ApiClient(fetchImpl)
    const task = await client.nextTask('shoes', 'w1')
    expect(task?.target_id).toBe('t1')
    expect(task?.candidates).toHaveLength(14)
  })

  it('maps 204 to null (no tasks remaining)', async () => {
    const {fetchImpl} = fakeService()
    const client = new ApiClient(fetchImpl)
    await client.nextTask('shoes', 'w1')
    expect(await client.nextTask('shoes', 'w1')).toBeNull()
  })

  it('surfaces rejection acks without throwing', async () => {
    const {fetchImpl} = fakeService()
    const client = new ApiClient(fetchImpl)
    const ack = await client.submit({
      worker_id: 'w1',
      target_id: 't1',
      selected: [],
      justification: 'nope',
      duration_ms: 10,
    })
    expect(ack.accepted).toBe(false)
    expect(ack.reason).toMatch(/attention check/)
  })

  it('throws on unexpected statuses', async () => {
    const client = new ApiClient(async () => new Response('boom', {status: 500}))
    await expect(client.nextTask('shoes', 'w')).rejects.toThrow()
  })
})

describe('judging flow', () => {
  it('fetch -> client-side reject -> valid submit -> exhausted', async () => {
    const {fetchImpl, submissions} = fakeService()
    const client = new ApiClient(fetchImpl)

    const task = await client.nextTask('shoes', 'w1')
    expect(task).not.toBeNull()
    const view = new TaskView(task!)

    // A one-word justification never reaches the network: the submit button
    // stays disabled because the client mirrors the service policy.
    view.justification = 'nice'
    expect(validateJustification(view.justification).valid).toBe(false)
    expect(view.canSubmit()).toBe(false)
    expect(submissions).toHaveLength(0)

    view.toggle('c1')
    view.toggle('c4')
    view.justification = GOOD
    expect(view.canSubmit()).toBe(true)
    const ack = await client.submit(view.payload('w1'))
    expect(ack.accepted).toBe(true)
    expect(submissions).toHaveLength(1)
    expect(submissions[0].selected).toEqual(['c1', 'c4'])

    expect(await client.nextTask('shoes', 'w1')).toBeNull()
  })

  it('empty selection with a valid sentence is accepted', async () => {
    const {fetchImpl, submissions} = fakeService()
    const client = new ApiClient(fetchImpl)
    const task = await client.nextTask('shoes', 'w2')
    const view = new TaskView(task!)
    view.justification = GOOD
    const ack = await client.submit(view.payload('w2'))
    expect(ack.accepted).toBe(true)
    expect(submissions[0].selected).toEqual([])
  })

  it('rejected submissions keep the view state intact', async () => {
    const {fetchImpl} = fakeService()
    const client = new ApiClient(fetchImpl)
    const task = await client.nextTask('shoes', 'w3')
    const view = new TaskView(task!)
    view.toggle('c2')
    view.justification = GOOD
    await client.submit(view.payload('w3'))
    // Same worker, same target: the service rejects the duplicate, the view
    // still holds the selection for correction.
    const ack = await client.submit(view.payload('w3'))
    expect(ack.accepted).toBe(false)
    expect(ack.reason).toMatch(/already judged/)
    expect(view.selected()).toEqual(['c2'])
    expect(view.justification).toBe(GOOD)
  })
})
