// Minimal sanitizing Markdown renderer for the feedback documents the
// service produces: a title heading, "##" section headings, bullet lists,
// and plain paragraphs. All input text is HTML-escaped before any structure
// is added, so raw HTML in feedback can never execute.

const ENTITIES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => ENTITIES[ch] ?? ch);
}

interface Block {
  kind: "h1" | "h2" | "ul" | "p";
  lines: string[];
}

function toBlocks(markdown: string): Block[] {
  const blocks: Block[] = [];
  for (const chunk of markdown.split(/\n{2,}/)) {
    const lines = chunk.split("\n").filter((line) => line.trim() !== "");
    if (lines.length === 0) continue;
    const first = lines[0] ?? "";
    if (first.startsWith("## ")) {
      blocks.push({ kind: "h2", lines: [first.slice(3)] });
      const rest = lines.slice(1);
      if (rest.length > 0) blocks.push(classify(rest));
    } else if (first.startsWith("# ")) {
      blocks.push({ kind: "h1", lines: [first.slice(2)] });
      const rest = lines.slice(1);
      if (rest.length > 0) blocks.push(classify(rest));
    } else {
      blocks.push(classify(lines));
    }
  }
  return blocks;
}

function classify(lines: string[]): Block {
  if (lines.every((line) => line.trimStart().startsWith("- "))) {
    return { kind: "ul", lines: lines.map((l) => l.trimStart().slice(2)) };
  }
  return { kind: "p", lines };
}

function renderBlock(block: Block): string {
  switch (block.kind) {
    case "h1":
      return `<h1>${escapeHtml(block.lines[0] ?? "")}</h1>`;
    case "h2":
      return `<h2>${escapeHtml(block.lines[0] ?? "")}</h2>`;
    case "ul":
      return `<ul>${block.lines.map((l) => `<li>${escapeHtml(l)}</li>`).join("")}</ul>`;
    case "p":
      return `<p>${escapeHtml(block.lines.join(" "))}</p>`;
  }
}

export function renderMarkdown(markdown: string): string {
  return toBlocks(markdown).map(renderBlock).join("\n");
}

export interface MarkdownSection {
  heading: string;
  body: string; // markdown of everything under the heading
}

export interface SplitDocument {
  title: string;
  preamble: string; // markdown before the first section heading
  sections: MarkdownSection[];
}

// Structural split at "## " headings; the text itself is left untouched so
// the rendered content is exactly what the service sent.
export function splitSections(markdown: string): SplitDocument {
  const lines = markdown.split("\n");
  let title = "";
  const preamble: string[] = [];
  const sections: MarkdownSection[] = [];
  let current: MarkdownSection | null = null;
  for (const line of lines) {
    if (line.startsWith("## ")) {
      current = { heading: line.slice(3).trim(), body: "" };
      sections.push(current);
    } else if (line.startsWith("# ") && title === "") {
      title = line.slice(2).trim();
    } else if (current) {
      current.body += line + "\n";
    } else {
      preamble.push(line);
    }
  }
  for (const section of sections) section.body = section.body.trim();
  return { title, preamble: preamble.join("\n").trim(), sections };
}

const TAG = /<[^>]+>/g;

function decodeEntities(text: string): string {
  return text
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&#39;/g, "'")
    .replace(/&amp;/g, "&");
}

function collapse(text: string): string {
  return text.replace(/\s+/g, " ").trim();
}

// Plain text of rendered HTML: tags dropped, entities decoded, whitespace
// collapsed. Used to check that rendering never alters the words.
export function textFromHtml(html: string): string {
  return collapse(decodeEntities(html.replace(TAG, " ")));
}

// Plain text of a Markdown document: list and heading markers dropped,
// whitespace collapsed.
export function stripMarkdown(markdown: string): string {
  const stripped = markdown
    .split("\n")
    .map((line) =>
      line
        .replace(/^#{1,6}\s+/, "")
        .replace(/^\s*-\s+/, ""),
    )
    .join(" ");
  return collapse(stripped);
}
