/**
 * SVG renderer for the story tree. Browser-only; everything here is a
 * projection of the Scene model, and every user gesture goes out as a
 * UiEvent for the shell to reduce. No story state lives in the DOM.
 */

// d3 arrives as the UMD global loaded by index.html; the type-only
// import keeps full typings without emitting a bare-specifier import
// the browser could not resolve.
import type * as D3 from "d3";
declare const d3: typeof D3;

import { datumText } from "./charts.js";
import type { ChartSpec } from "./charts.js";
import type { UiEvent } from "./state.js";
import type { Scene, SceneEdge, SceneNode } from "./tree.js";

const DISC_R = 16;
const CARD_W = 170;
const CARD_H = 128;
const CHART_W = CARD_W - 24;
const CHART_H = CARD_H - 52;

export type EventSink = (event: UiEvent) => void;

export class TreeView {
  private readonly svg: D3.Selection<SVGSVGElement, unknown, null, undefined>;
  private readonly root: D3.Selection<SVGGElement, unknown, null, undefined>;
  private readonly tooltip: D3.Selection<HTMLDivElement, unknown, null, undefined>;
  private readonly sink: EventSink;

  constructor(container: HTMLElement, sink: EventSink) {
    this.sink = sink;
    this.svg = d3
      .select(container)
      .append("svg")
      .attr("class", "tree-view")
      .attr("preserveAspectRatio", "xMidYMid meet");
    this.root = this.svg.append("g").attr("class", "tree-root");
    this.root.append("g").attr("class", "rings");
    this.root.append("g").attr("class", "edges");
    this.root.append("g").attr("class", "nodes");
    this.tooltip = d3
      .select(container)
      .append("div")
      .attr("class", "tooltip")
      .style("display", "none");

    this.svg.call(
      d3
        .zoom<SVGSVGElement, unknown>()
        .scaleExtent([0.3, 3])
        .on("zoom", (ev: D3.D3ZoomEvent<SVGSVGElement, unknown>) => {
          this.root.attr(
            "transform",
            `translate(${this.cx + ev.transform.x},${this.cy + ev.transform.y}) scale(${ev.transform.k})`,
          );
        }),
    );
  }

  private cx = 0;
  private cy = 0;

  render(scene: Scene): void {
    const maxRing = scene.rings.length ? Math.max(...scene.rings) : 0;
    const pad = maxRing + CARD_W;
    this.cx = pad;
    this.cy = pad;
    this.svg.attr("viewBox", `0 0 ${2 * pad} ${2 * pad}`);
    this.root.attr("transform", `translate(${pad},${pad})`);

    this.root
      .select<SVGGElement>("g.rings")
      .selectAll<SVGCircleElement, number>("circle")
      .data(scene.rings, (r) => String(r))
      .join("circle")
      .attr("r", (r) => r)
      .attr("fill", "none")
      .attr("stroke", "#d8d8e0")
      .attr("stroke-dasharray", "2 6");

    this.renderEdges(scene.edges);
    this.renderNodes(scene.nodes);
  }

  private showTip(html: string, ev: MouseEvent): void {
    this.tooltip
      .style("display", "block")
      .style("left", `${ev.offsetX + 14}px`)
      .style("top", `${ev.offsetY + 14}px`)
      .text(html);
  }

  private hideTip(): void {
    this.tooltip.style("display", "none");
  }

  private renderEdges(edges: SceneEdge[]): void {
    const sink = this.sink;
    const view = this;
    const sel = this.root
      .select<SVGGElement>("g.edges")
      .selectAll<SVGGElement, SceneEdge>("g.edge")
      .data(edges, (e) => `${e.from}->${e.to}`)
      .join((enter) => enter.append("g").attr("class", "edge"));

    sel.each(function (e) {
      const g = d3.select(this);
      g.selectAll("*").remove();
      if (e.style.form === "taper") {
        // thick at the parent end, thin at the child: draw a quad
        const dx = e.x2 - e.x1;
        const dy = e.y2 - e.y1;
        const len = Math.hypot(dx, dy) || 1;
        const nx = -dy / len;
        const ny = dx / len;
        const [w1, w2] = e.style.width;
        const h1 = w1 / 2;
        const h2 = w2 / 2;
        g.append("polygon")
          .attr(
            "points",
            [
              `${e.x1 + nx * h1},${e.y1 + ny * h1}`,
              `${e.x1 - nx * h1},${e.y1 - ny * h1}`,
              `${e.x2 - nx * h2},${e.y2 - ny * h2}`,
              `${e.x2 + nx * h2},${e.y2 + ny * h2}`,
            ].join(" "),
          )
          .attr("fill", "#9aa0b4");
      } else {
        const line = g
          .append("line")
          .attr("x1", e.x1)
          .attr("y1", e.y1)
          .attr("x2", e.x2)
          .attr("y2", e.y2)
          .attr("stroke", "#9aa0b4")
          .attr("stroke-width", e.style.width[0]);
        if (e.style.dash) line.attr("stroke-dasharray", e.style.dash);
      }
      // fat invisible hit line so hover is forgiving
      g.append("line")
        .attr("x1", e.x1)
        .attr("y1", e.y1)
        .attr("x2", e.x2)
        .attr("y2", e.y2)
        .attr("stroke", "transparent")
        .attr("stroke-width", 12)
        .on("mouseenter", function (ev: MouseEvent) {
          sink({ type: "hover", target: { kind: "edge", text: e.relationText } });
          view.showTip(e.relationText, ev);
        })
        .on("mouseleave", () => {
          sink({ type: "hover", target: null });
          view.hideTip();
        });
    });
  }

  private renderNodes(nodes: SceneNode[]): void {
    const sink = this.sink;
    const view = this;
    const sel = this.root
      .select<SVGGElement>("g.nodes")
      .selectAll<SVGGElement, SceneNode>("g.node")
      .data(nodes, (n) => n.nodeId)
      .join((enter) => enter.append("g").attr("class", "node"));

    sel.attr("transform", (n) => `translate(${n.x},${n.y})`).style("cursor", "pointer");

    sel.each(function (n) {
      const g = d3.select(this);
      g.selectAll("*").remove();
      if (n.kind === "disc") {
        g.append("circle")
          .attr("r", DISC_R)
          .attr("fill", "#ffffff")
          .attr("stroke", n.color)
          .attr("stroke-width", n.borderWidth);
        g.append("path")
          .attr("d", n.glyph.path)
          .attr("transform", `translate(${-10},${-10})`)
          .attr("fill", n.color);
        g.append("title").text(`${n.glyph.title}: ${n.hoverText}`);
      } else {
        g.append("rect")
          .attr("x", -CARD_W / 2)
          .attr("y", -CARD_H / 2)
          .attr("width", CARD_W)
          .attr("height", CARD_H)
          .attr("rx", 8)
          .attr("fill", "#ffffff")
          .attr("stroke", n.color)
          .attr("stroke-width", n.borderWidth);
        g.append("path")
          .attr("d", n.glyph.path)
          .attr("transform", `translate(${-CARD_W / 2 + 8},${-CARD_H / 2 + 6}) scale(0.8)`)
          .attr("fill", n.color);
        if (n.chart) {
          const chart = g
            .append("g")
            .attr("transform", `translate(${-CHART_W / 2},${-CHART_H / 2 + 6})`);
          view.renderChart(chart, n.chart);
          g.append("text")
            .attr("class", "caption")
            .attr("y", CARD_H / 2 - 8)
            .attr("text-anchor", "middle")
            .text(n.chart.annotation ?? n.chart.caption);
        }
      }
      if (n.pinned) {
        g.append("circle")
          .attr("class", "pin-dot")
          .attr("cx", n.kind === "disc" ? DISC_R - 3 : CARD_W / 2 - 8)
          .attr("cy", n.kind === "disc" ? -DISC_R + 3 : -CARD_H / 2 + 8)
          .attr("r", 3.5)
          .attr("fill", "#c4452e");
      }
    });

    sel
      .on("click", (ev: MouseEvent, n) => {
        ev.stopPropagation();
        if (ev.altKey) sink({ type: "pin", nodeId: n.nodeId, pinned: !n.pinned });
        else sink({ type: "click", nodeId: n.nodeId });
      })
      .on("dblclick", (ev: MouseEvent, n) => {
        ev.stopPropagation();
        sink({ type: n.kind === "disc" ? "expand" : "collapse", nodeId: n.nodeId });
      })
      .on("mouseenter", (ev: MouseEvent, n) => {
        sink({ type: "hover", target: { kind: "node", text: n.hoverText } });
        view.showTip(n.hoverText, ev);
      })
      .on("mouseleave", () => {
        sink({ type: "hover", target: null });
        view.hideTip();
      })
      .call(
        d3
          .drag<SVGGElement, SceneNode>()
          .on("drag", (ev: D3.D3DragEvent<SVGGElement, SceneNode, unknown>, n) => {
            // dragging slides the node along its ring and pins it there
            const angle = Math.atan2(ev.y, ev.x) + Math.PI / 2;
            sink({ type: "drag", nodeId: n.nodeId, angle });
          })
          .on("end", (_ev, n) => {
            if (!n.pinned) sink({ type: "pin", nodeId: n.nodeId, pinned: true });
          }),
      );
  }

  private renderChart(
    g: D3.Selection<SVGGElement, unknown, null, undefined>,
    spec: ChartSpec,
  ): void {
    const sink = this.sink;
    const view = this;
    const first = spec.series[0];
    if (!first || first.values.length === 0) return;

    const hover = (series: typeof first, i: number) =>
      function (this: Element, ev: MouseEvent) {
        const text = datumText(series, i);
        sink({ type: "hover", target: { kind: "chart-point", text } });
        view.showTip(text, ev);
      };
    const leave = () => {
      sink({ type: "hover", target: null });
      view.hideTip();
    };

    if (spec.form === "scatter" && spec.series.length === 2) {
      const second = spec.series[1]!;
      const x = d3.scaleLinear().domain(d3.extent(first.values) as [number, number]).range([0, CHART_W]);
      const y = d3
        .scaleLinear()
        .domain(d3.extent(second.values) as [number, number])
        .range([CHART_H, 0]);
      first.values.forEach((v, i) => {
        const w = second.values[i];
        if (w === undefined) return;
        g.append("circle")
          .attr("cx", x(v))
          .attr("cy", y(w))
          .attr("r", 3)
          .attr("fill", spec.color)
          .on("mouseenter", hover(first, i))
          .on("mouseleave", leave);
      });
      return;
    }

    const xBand = d3.scaleBand<number>().domain(d3.range(first.values.length)).range([0, CHART_W]).padding(0.2);
    const allValues = spec.series.flatMap((s) => s.values);
    const lo = Math.min(0, d3.min(allValues) ?? 0);
    const hi = Math.max(0, d3.max(allValues) ?? 1);
    const y = d3.scaleLinear().domain([lo, hi]).nice().range([CHART_H, 0]);

    if (spec.form === "bar-highlight") {
      first.values.forEach((v, i) => {
        const label = first.labels[i] ?? "";
        const emphasized = spec.emphasis.includes(label);
        g.append("rect")
          .attr("x", xBand(i) ?? 0)
          .attr("width", xBand.bandwidth())
          .attr("y", Math.min(y(v), y(0)))
          .attr("height", Math.abs(y(v) - y(0)))
          .attr("fill", spec.color)
          .attr("opacity", emphasized ? 1 : 0.35)
          .on("mouseenter", hover(first, i))
          .on("mouseleave", leave);
      });
      return;
    }

    const lineOf = (series: typeof first) =>
      d3
        .line<number>()
        .x((_, i) => (xBand(i) ?? 0) + xBand.bandwidth() / 2)
        .y((v) => y(v))(series.values) ?? "";

    if (spec.form === "area-distribution") {
      const area =
        d3
          .area<number>()
          .x((_, i) => (xBand(i) ?? 0) + xBand.bandwidth() / 2)
          .y0(y(lo))
          .y1((v) => y(v))(first.values) ?? "";
      g.append("path").attr("d", area).attr("fill", spec.color).attr("opacity", 0.35);
      g.append("path").attr("d", lineOf(first)).attr("fill", "none").attr("stroke", spec.color).attr("stroke-width", 1.5);
    } else {
      // line-marked and dual-line
      spec.series.forEach((series, si) => {
        g.append("path")
          .attr("d", lineOf(series))
          .attr("fill", "none")
          .attr("stroke", spec.color)
          .attr("stroke-width", si === 0 ? 2 : 1.5)
          .attr("stroke-dasharray", si === 0 ? null : "4 3");
      });
    }
    // invisible hover targets over the sample positions
    first.values.forEach((_, i) => {
      g.append("rect")
        .attr("x", xBand(i) ?? 0)
        .attr("width", xBand.bandwidth())
        .attr("y", 0)
        .attr("height", CHART_H)
        .attr("fill", "transparent")
        .on("mouseenter", hover(first, i))
        .on("mouseleave", leave);
    });
  }
}
