/** DOM wiring for the frontier explorer.
 *
 * The weights panel is built once and updated in place so a slider drag
 * never recreates the input mid-gesture; the scatter, table, and
 * partition panels re-render wholesale on every store notification.
 */

import { clusterCards } from "./clusters.js";
import {
  formatNumber,
  metricLabel,
  sizeBadge,
  sizeBadgeText,
} from "./format.js";
import { scatterLayout } from "./scatter.js";
import type { FrontierStore } from "./store.js";
import type { MetricName, TrialView, WeightField } from "./types.js";
import { WEIGHT_FIELDS } from "./types.js";

const METRICS: readonly MetricName[] = ["bcs", "icp", "sm", "mq", "ifn", "ned"];
const SVG_NS = "http://www.w3.org/2000/svg";

type SortKey = "id" | "loss" | MetricName;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs?: Record<string, string>,
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (attrs) {
    for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function buildApp(root: HTMLElement, store: FrontierStore): void {
  let xMetric: MetricName = "icp";
  let yMetric: MetricName = "bcs";
  let sortKey: SortKey = "id";
  let sortDesc = false;

  const banner = el("div", { class: "banner", hidden: "" });
  const weightsPanel = el("section", { class: "weights" });
  const scatterPanel = el("section", { class: "scatter" });
  const tablePanel = el("section", { class: "trials" });
  const partitionPanel = el("section", { class: "partition" });

  root.replaceChildren(
    el("h1", {}, "frontier explorer"),
    banner,
    weightsPanel,
    el("div", { class: "row" }, scatterPanel, tablePanel),
    partitionPanel,
  );

  // ---- weights panel (built once, synced in place) ----

  interface FieldControls {
    slider: HTMLInputElement;
    number: HTMLInputElement;
    calibratedMark: HTMLElement;
    error: HTMLElement;
  }
  const fields = new Map<WeightField, FieldControls>();
  const reselectNote = el("p", { class: "reselect-error", hidden: "" });

  function buildWeightsPanel(): void {
    const rows = WEIGHT_FIELDS.map((field) => {
      const slider = el("input", {
        type: "range",
        min: "-3",
        max: "3",
        step: "0.01",
        list: `calibrated-${field}`,
      });
      const number = el("input", { type: "number", step: "0.01" });
      const push = (input: HTMLInputElement) => () =>
        store.setWeight(field, input.valueAsNumber);
      slider.addEventListener("input", push(slider));
      number.addEventListener("input", push(number));
      const controls: FieldControls = {
        slider,
        number,
        calibratedMark: el("span", { class: "calibrated" }),
        error: el("span", { class: "field-error" }),
      };
      fields.set(field, controls);
      return el(
        "div",
        { class: "weight-row" },
        el("label", {}, field),
        slider,
        el("datalist", { id: `calibrated-${field}` }),
        number,
        controls.calibratedMark,
        controls.error,
      );
    });
    const reset = el("button", { type: "button" }, "reset to calibrated");
    reset.addEventListener("click", () => store.resetToCalibrated());
    weightsPanel.replaceChildren(
      el("h2", {}, "selection weights"),
      ...rows,
      reset,
      reselectNote,
    );
  }
  buildWeightsPanel();

  function syncWeights(): void {
    const { weights, calibrated, fieldErrors, reselectError } = store.state;
    for (const field of WEIGHT_FIELDS) {
      const controls = fields.get(field);
      if (!controls) continue;
      const value = weights[field];
      if (document.activeElement !== controls.slider) {
        controls.slider.value = String(value);
      }
      if (document.activeElement !== controls.number) {
        controls.number.value = String(value);
      }
      const calibratedValue = calibrated?.weights[field];
      if (calibratedValue !== undefined) {
        controls.calibratedMark.textContent = `calibrated ${formatNumber(calibratedValue, 2)}`;
        const datalist = weightsPanel.querySelector(`#calibrated-${field}`);
        if (datalist && datalist.childElementCount === 0) {
          datalist.append(el("option", { value: String(calibratedValue) }));
        }
      }
      controls.error.textContent = fieldErrors[field] ?? "";
    }
    reselectNote.textContent = reselectError ?? "";
    reselectNote.hidden = reselectError === undefined;
  }

  // ---- scatter ----

  function renderScatter(): void {
    const frontier = store.state.frontier;
    if (!frontier || frontier.trials.length === 0) {
      scatterPanel.replaceChildren();
      return;
    }
    const pick = (current: MetricName, apply: (m: MetricName) => void) => {
      const select = el("select");
      for (const metric of METRICS) {
        const option = el("option", { value: metric }, metricLabel(metric));
        if (metric === current) option.setAttribute("selected", "");
        select.append(option);
      }
      select.addEventListener("change", () => {
        apply(select.value as MetricName);
        renderScatter();
      });
      return select;
    };
    const layout = scatterLayout(
      frontier.trials,
      xMetric,
      yMetric,
      store.state.selectedId,
    );
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${layout.width} ${layout.height}`);
    svg.setAttribute("class", "scatter-plot");
    for (const point of layout.points) {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", point.x.toFixed(1));
      circle.setAttribute("cy", point.y.toFixed(1));
      circle.setAttribute("r", point.selected ? "8" : "5");
      circle.setAttribute("class", point.selected ? "point selected" : "point");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent =
        `trial ${point.id}: ${xMetric}=${formatNumber(point.xValue)}, ` +
        `${yMetric}=${formatNumber(point.yValue)}`;
      circle.append(title);
      circle.addEventListener("click", () => void store.inspect(point.id));
      svg.append(circle);
    }
    const axes = el(
      "div",
      { class: "axes" },
      el("label", {}, "x: "),
      pick(xMetric, (m) => (xMetric = m)),
      el("label", {}, " y: "),
      pick(yMetric, (m) => (yMetric = m)),
    );
    scatterPanel.replaceChildren(el("h2", {}, "metric trade-offs"), axes, svg);
  }

  // ---- trial table ----

  function sortedTrials(trials: readonly TrialView[]): TrialView[] {
    const losses = store.state.losses;
    const value = (t: TrialView): number => {
      if (sortKey === "id") return t.id;
      if (sortKey === "loss") return losses.get(t.id) ?? Number.POSITIVE_INFINITY;
      return t.metrics?.[sortKey] ?? Number.POSITIVE_INFINITY;
    };
    return [...trials].sort((a, b) => {
      const diff = value(a) - value(b);
      return (sortDesc ? -diff : diff) || a.id - b.id;
    });
  }

  function headerCell(label: string, key: SortKey): HTMLElement {
    const cell = el("th", {}, label + (sortKey === key ? (sortDesc ? " ▾" : " ▴") : ""));
    cell.addEventListener("click", () => {
      sortDesc = sortKey === key ? !sortDesc : false;
      sortKey = key;
      renderTable();
    });
    return cell;
  }

  function renderTable(): void {
    const frontier = store.state.frontier;
    if (!frontier) {
      tablePanel.replaceChildren();
      return;
    }
    if (frontier.trials.length === 0) {
      tablePanel.replaceChildren(
        el("h2", {}, "trials"),
        el("p", { class: "empty" }, "no trials in this frontier"),
      );
      return;
    }
    const head = el(
      "tr",
      {},
      headerCell("trial", "id"),
      el("th", {}, "k"),
      headerCell("loss", "loss"),
      ...METRICS.map((m) => headerCell(metricLabel(m), m)),
      el("th", {}, "status"),
    );
    const body = sortedTrials(frontier.trials).map((trial) => {
      const row = el(
        "tr",
        { class: trial.id === store.state.selectedId ? "selected" : "" },
        el("td", {}, String(trial.id)),
        el("td", {}, trial.partition ? String(trial.partition.k) : "—"),
        el("td", {}, formatNumber(store.state.losses.get(trial.id) ?? NaN)),
        ...METRICS.map((m) =>
          el("td", {}, trial.metrics ? formatNumber(trial.metrics[m]) : "—"),
        ),
        el("td", {}, trial.ok ? "ok" : `failed: ${trial.error ?? "unknown"}`),
      );
      row.addEventListener("click", () => void store.inspect(trial.id));
      return row;
    });
    tablePanel.replaceChildren(
      el("h2", {}, "trials"),
      el("table", {}, el("thead", {}, head), el("tbody", {}, ...body)),
    );
  }

  // ---- partition panel ----

  function renderPartition(): void {
    const { inspectedId, partition, partitionError, graph } = store.state;
    if (inspectedId === null) {
      partitionPanel.replaceChildren(
        el("h2", {}, "partition"),
        el("p", { class: "empty" }, "click a trial to inspect its partition"),
      );
      return;
    }
    if (partitionError !== undefined) {
      partitionPanel.replaceChildren(
        el("h2", {}, `partition — trial ${inspectedId}`),
        el("p", { class: "error" }, partitionError),
      );
      return;
    }
    if (!partition || !graph) {
      partitionPanel.replaceChildren(
        el("h2", {}, `partition — trial ${inspectedId}`),
        el("p", { class: "empty" }, "loading…"),
      );
      return;
    }
    const summary = clusterCards(partition, graph);
    const cards = summary.cards.map((card) => {
      const badge = sizeBadge(card.size);
      const header = el(
        "header",
        {},
        `cluster ${card.cluster} — ${card.size} classes`,
        badge
          ? el("span", { class: `badge ${badge}` }, sizeBadgeText(badge))
          : "",
        el("span", { class: "cross" }, `cross edges: ${card.crossEdges}`),
      );
      return el(
        "article",
        { class: "cluster-card" },
        header,
        el("ul", {}, ...card.classes.map((cls) => el("li", {}, cls))),
      );
    });
    partitionPanel.replaceChildren(
      el(
        "h2",
        {},
        `partition — trial ${inspectedId}, k=${partition.k}, ` +
          `${summary.crossingEdges}/${summary.totalEdges} edges cross clusters`,
      ),
      el("div", { class: "cards" }, ...cards),
    );
  }

  // ---- banner + top-level render ----

  function renderBanner(): void {
    const { status, error } = store.state;
    if (status === "error") {
      const retry = el("button", { type: "button" }, "retry");
      retry.addEventListener("click", () => void store.load());
      banner.replaceChildren(el("span", {}, error ?? "load failed"), retry);
      banner.hidden = false;
      banner.className = "banner error";
    } else if (status === "loading") {
      banner.replaceChildren(el("span", {}, "loading…"));
      banner.hidden = false;
      banner.className = "banner";
    } else {
      banner.hidden = true;
    }
  }

  function render(): void {
    renderBanner();
    syncWeights();
    renderScatter();
    renderTable();
    renderPartition();
  }

  store.subscribe(render);
  render();
}
