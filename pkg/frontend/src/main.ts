import {ApiClient, type JudgingTask} from './api.js'
import {mediaKind, placeholderColor, shortLabel} from './media.js'
import {TaskView} from './state.js'
import {validateJustification} from './validation.js'

const api = new ApiClient()

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

function workerId(): string {
  const key = 'altereval-worker'
  let id = localStorage.getItem(key)
  if (!id) {
    id = `w-${Math.random().toString(36).slice(2, 10)}`
    localStorage.setItem(key, id)
  }
  return id
}

function show(screen: 'consent' | 'task' | 'done' | 'empty') {
  for (const name of ['consent', 'task', 'done', 'empty']) {
    el(`screen-${name}`).hidden = name !== screen
  }
}

function renderTile(view: TaskView, itemId: string, isTarget: boolean): HTMLElement {
  const tile = document.createElement('div')
  tile.className = isTarget ? 'tile target-tile' : 'tile candidate-tile'
  tile.dataset.item = itemId
  const ref = view.task.display_payloads[itemId] ?? `synthetic:${itemId}`
  if (mediaKind(ref) === 'image') {
    const img = document.createElement('img')
    img.src = ref
    img.alt = itemId
    tile.appendChild(img)
  } else {
    const swatch = document.createElement('div')
    swatch.className = 'swatch'
    swatch.style.background = placeholderColor(itemId)
    tile.appendChild(swatch)
  }
  const caption = document.createElement('span')
  caption.className = 'caption'
  caption.textContent = isTarget ? `target ${shortLabel(itemId)}` : shortLabel(itemId)
  tile.appendChild(caption)
  return tile
}

let view: TaskView | null = null
let activeCategory = 'default'

function renderTask(task: JudgingTask) {
  view = new TaskView(task)
  el('task-category').textContent = task.category
  const targetBox = el('target-box')
  targetBox.replaceChildren(renderTile(view, task.target_id, true))
  const grid = el('candidate-grid')
  grid.replaceChildren(
    ...task.candidates.map(candidate => {
      const tile = renderTile(view!, candidate, false)
      tile.addEventListener('click', () => {
        const selected = view!.toggle(candidate)
        tile.classList.toggle('selected', selected)
        updateSelectionCount()
      })
      return tile
    }),
  )
  const justification = el<HTMLTextAreaElement>('justification')
  justification.value = ''
  view.justification = ''
  setError('')
  updateSelectionCount()
  updateValidation()
  show('task')
}

function updateSelectionCount() {
  const count = view ? view.selected().length : 0
  el('selection-count').textContent =
    count === 0 ? 'No alternatives selected (allowed if none fits).' : `${count} selected.`
}

function updateValidation() {
  const result = validateJustification(view ? view.justification : '')
  el('validation-hint').textContent = result.message
  el('validation-hint').classList.toggle('invalid', !result.valid)
  el<HTMLButtonElement>('submit').disabled = !result.valid
}

function setError(message: string) {
  const banner = el('error-banner')
  banner.textContent = message
  banner.hidden = message === ''
}

async function loadNext() {
  setError('')
  try {
    const task = await api.nextTask(activeCategory, workerId())
    if (task === null) {
      show('empty')
      return
    }
    renderTask(task)
  } catch (err) {
    setError(`Could not fetch a task (${String(err)}). Check the service and retry.`)
    show('task')
  }
}

async function submitCurrent() {
  if (!view || !view.canSubmit()) return
  const button = el<HTMLButtonElement>('submit')
  button.disabled = true
  try {
    const ack = await api.submit(view.payload(workerId()))
    if (!ack.accepted) {
      // Keep all state so the worker can adjust and resubmit.
      setError(`Submission rejected: ${ack.reason ?? 'unknown reason'}`)
      button.disabled = false
      return
    }
    await loadNext()
  } catch (err) {
    setError(`Network problem (${String(err)}); your selections were kept. Retry.`)
    button.disabled = false
  }
}

function wire() {
  el('consent-start').addEventListener('click', async () => {
    const agreed = el<HTMLInputElement>('consent-check').checked
    if (!agreed) {
      setError('Please confirm you understood the instructions first.')
      return
    }
    const categories = await api.categories().catch(() => [] as string[])
    if (categories.length > 0) {
      activeCategory = categories[0]
    }
    await loadNext()
  })
  el<HTMLTextAreaElement>('justification').addEventListener('input', event => {
    if (!view) return
    view.justification = (event.target as HTMLTextAreaElement).value
    updateValidation()
  })
  el('submit').addEventListener('click', () => void submitCurrent())
  el('retry').addEventListener('click', () => void loadNext())
  show('consent')
}

document.addEventListener('DOMContentLoaded', wire)
