/**
 * Minimal SVG text assembly.  Coordinates are emitted with a fixed two-decimal
 * format and attributes in authoring order, so a rendered figure is a pure
 * function of its inputs down to the byte.
 */

export function fmtCoord(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate ${v}`);
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export type Attrs = Record<string, string | number>;

function attrText(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${typeof v === "number" ? fmtCoord(v) : escapeXml(v)}"`)
    .join("");
}

export function el(tag: string, attrs: Attrs, children?: string[] | string): string {
  const inner = children === undefined ? null : Array.isArray(children) ? children.join("") : children;
  return inner === null
    ? `<${tag}${attrText(attrs)}/>`
    : `<${tag}${attrText(attrs)}>${inner}</${tag}>`;
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  return el("text", { x, y, ...attrs }, escapeXml(content));
}

export function svgDoc(width: number, height: number, body: string[]): string {
  return (
    `<?xml version="1.0" encoding="UTF-8"?>\n` +
    el(
      "svg",
      {
        xmlns: "http://www.w3.org/2000/svg",
        width,
        height,
        viewBox: `0 0 ${width} ${height}`,
        "font-family": "Helvetica, Arial, sans-serif",
      },
      body,
    ) +
    "\n"
  );
}
