// Media references are opaque strings: URLs render as images, synthetic ids
// as labelled colored placeholders (desk-scale catalogs have no real images).

export type MediaKind = 'image' | 'placeholder'

export function mediaKind(ref: string): MediaKind {
  if (/^https?:\/\//.test(ref) || /\.(png|jpe?g|gif|webp|svg)$/i.test(ref)) return 'image'
  return 'placeholder'
}

/** Stable pastel color derived from the item id. */
export function placeholderColor(itemId: string): string {
  let hash = 0
  for (let i = 0; i < itemId.length; i++) {
    hash = (hash * 31 + itemId.charCodeAt(i)) >>> 0
  }
  const hue = hash % 360
  const light = 55 + (hash >>> 9) % 25
  return `hsl(${hue}, 65%, ${light}%)`
}

export function shortLabel(itemId: string): string {
  return itemId.length <= 12 ? itemId : `${itemId.slice(0, 5)}…${itemId.slice(-5)}`
}
