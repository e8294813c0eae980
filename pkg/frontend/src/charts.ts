// Client-rendered SVG bar charts for the analytics views.

export interface Bar {
  label: string;
  value: number;
}

export interface BarChartOptions {
  width?: number;
  height?: number;
  unit?: string;
}

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Render bars with heights proportional to their values. Each bar carries
 * data-label / data-value attributes so behavior is assertable without a
 * rendering engine.
 */
export function barChart(bars: Bar[], options: BarChartOptions = {}): string {
  const width = options.width ?? 480;
  const height = options.height ?? 220;
  const pad = 28;
  if (bars.length === 0) {
    return `<svg class="chart" viewBox="0 0 ${width} ${height}" role="img">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" ` +
      `class="chart-empty">no data</text></svg>`;
  }
  const max = Math.max(...bars.map((b) => b.value), 1);
  const innerHeight = height - pad * 2;
  const slot = (width - pad * 2) / bars.length;
  const barWidth = Math.min(56, slot * 0.7);

  const parts: string[] = [];
  for (let i = 0; i < bars.length; i++) {
    const bar = bars[i];
    const barHeight = (bar.value / max) * innerHeight;
    const x = pad + i * slot + (slot - barWidth) / 2;
    const y = pad + (innerHeight - barHeight);
    parts.push(
      `<rect class="bar" data-label="${escapeXml(bar.label)}" ` +
        `data-value="${bar.value}" x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
        `width="${barWidth.toFixed(1)}" height="${barHeight.toFixed(1)}"/>`,
      `<text class="bar-value" x="${(x + barWidth / 2).toFixed(1)}" ` +
        `y="${(y - 6).toFixed(1)}" text-anchor="middle">` +
        `${bar.value}${options.unit ?? ""}</text>`,
      `<text class="bar-label" x="${(x + barWidth / 2).toFixed(1)}" ` +
        `y="${height - 8}" text-anchor="middle">${escapeXml(bar.label)}</text>`,
    );
  }
  return `<svg class="chart" viewBox="0 0 ${width} ${height}" role="img">` +
    parts.join("") + `</svg>`;
}

export function weakModuleBars(report: Record<string, number>): Bar[] {
  return Object.keys(report)
    .sort()
    .map((label) => ({ label, value: report[label] }));
}
