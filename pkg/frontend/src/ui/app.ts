/** Studio application shell: wires the service client to the UI panels. */

import { ApiClient, type Job, type ModelSummary } from "../lib/api";
import { buildLineage } from "../lib/lineage";
import { parseVxg1 } from "../lib/vxg";
import { renderLineage } from "./lineageView";
import { PlanEditor } from "./planEditor";
import { VoxelViewer, fitViewerStyles } from "./viewer";

const API_KEY = "arch-api-url";

function defaultApiUrl(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  if (fromQuery) return fromQuery;
  return localStorage.getItem(API_KEY) ?? `${location.protocol}//${location.hostname}:8000`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class StudioApp {
  private client: ApiClient;
  private models: ModelSummary[] = [];
  private jobs: Job[] = [];
  private selectedId: string | null = null;
  private viewer!: VoxelViewer;
  private planEditor!: PlanEditor;
  private statusEl!: HTMLElement;
  private modelListEl!: HTMLElement;
  private jobTableEl!: HTMLElement;
  private lineageEl!: HTMLElement;
  private logEl!: HTMLElement;
  private pollTimer = 0;

  constructor(private readonly root: HTMLElement) {
    this.client = new ApiClient(defaultApiUrl());
    this.buildLayout();
    void this.refresh();
    this.pollTimer = window.setInterval(() => void this.refresh(), 2000);
  }

  dispose(): void {
    clearInterval(this.pollTimer);
    this.viewer.dispose();
  }

  // -- data flow ---------------------------------------------------------

  private async refresh(): Promise<void> {
    try {
      const [models, jobs] = await Promise.all([this.client.listModels(), this.client.listJobs()]);
      this.models = models.sort((a, b) => a.created - b.created);
      this.jobs = jobs.sort((a, b) => b.created - a.created);
      this.statusEl.textContent = `connected · ${models.length} models`;
      this.statusEl.classList.remove("bad");
    } catch (err) {
      this.statusEl.textContent = `offline: ${(err as Error).message}`;
      this.statusEl.classList.add("bad");
      return;
    }
    this.renderModels();
    this.renderJobs();
    this.renderLineagePanel();
  }

  private async selectModel(id: string): Promise<void> {
    this.selectedId = id;
    this.renderModels();
    this.renderLineagePanel();
    try {
      const bytes = await this.client.getVoxelBytes(id);
      this.viewer.setGrid(parseVxg1(bytes), id.slice(0, 8));
    } catch (err) {
      this.log(`load failed: ${(err as Error).message}`);
    }
  }

  private async runJob(kind: string, params: Record<string, unknown>): Promise<void> {
    let job: Job;
    try {
      job = await this.client.submitJob(kind, params);
    } catch (err) {
      this.log(`${kind}: ${(err as Error).message}`);
      return;
    }
    this.log(`${kind} ${job.id.slice(0, 8)} queued`);
    try {
      const done = await this.client.pollJob(job.id, {
        intervalMs: 500,
        timeoutMs: 10 * 60 * 1000,
        onUpdate: () => void this.renderJobs(),
      });
      this.log(`${kind} ${job.id.slice(0, 8)} done`);
      await this.refresh();
      if (done.result_ids.length > 0) await this.selectModel(done.result_ids[0]);
      if (done.result) this.log(`result: ${JSON.stringify(done.result)}`);
    } catch (err) {
      this.log(`${kind} ${job.id.slice(0, 8)}: ${(err as Error).message}`);
    }
  }

  private log(message: string): void {
    const line = el("div", "log-line", `${new Date().toLocaleTimeString()} ${message}`);
    this.logEl.prepend(line);
    while (this.logEl.childElementCount > 60) this.logEl.lastElementChild!.remove();
  }

  // -- layout ------------------------------------------------------------

  private buildLayout(): void {
    this.root.textContent = "";
    const header = el("header");
    header.appendChild(el("h1", "", "voxarch studio"));
    const api = el("input") as HTMLInputElement;
    api.value = this.client.baseUrl;
    api.title = "service URL";
    api.addEventListener("change", () => {
      localStorage.setItem(API_KEY, api.value);
      this.client = new ApiClient(api.value);
      void this.refresh();
    });
    header.appendChild(api);
    this.statusEl = el("span", "status", "connecting…");
    header.appendChild(this.statusEl);
    this.root.appendChild(header);

    const main = el("main");
    const side = el("aside");
    side.appendChild(this.buildModelPanel());
    main.appendChild(side);

    const center = el("section", "center");
    center.appendChild(this.buildTabs());
    this.logEl = el("div", "log");
    center.appendChild(this.logEl);
    main.appendChild(center);

    const viewerHost = el("section", "viewer");
    main.appendChild(viewerHost);
    this.root.appendChild(main);

    this.viewer = new VoxelViewer(viewerHost);
    fitViewerStyles(viewerHost.querySelector("canvas")!);
  }

  private buildModelPanel(): HTMLElement {
    const panel = el("div", "panel");
    const bar = el("div", "row");
    bar.appendChild(el("h2", "", "models"));
    const upload = el("button", "", "upload");
    const file = el("input") as HTMLInputElement;
    file.type = "file";
    file.hidden = true;
    file.addEventListener("change", async () => {
      const chosen = file.files?.[0];
      if (!chosen) return;
      try {
        const record = await this.client.uploadModel(new Uint8Array(await chosen.arrayBuffer()));
        this.log(`uploaded ${record.id.slice(0, 8)} (${record.resolution}³)`);
        await this.refresh();
        await this.selectModel(record.id);
      } catch (err) {
        this.log(`upload: ${(err as Error).message}`);
      }
      file.value = "";
    });
    upload.addEventListener("click", () => file.click());
    bar.appendChild(upload);
    bar.appendChild(file);
    panel.appendChild(bar);
    this.modelListEl = el("div", "model-list");
    panel.appendChild(this.modelListEl);
    return panel;
  }

  private renderModels(): void {
    this.modelListEl.textContent = "";
    for (const m of [...this.models].reverse()) {
      const row = el(
        "div",
        `model-row${m.id === this.selectedId ? " selected" : ""}`,
        `${m.id.slice(0, 8)} · ${m.resolution}³ · ${m.lineage.op}`,
      );
      row.addEventListener("click", () => void this.selectModel(m.id));
      this.modelListEl.appendChild(row);
    }
  }

  private buildTabs(): HTMLElement {
    const wrap = el("div", "tabs");
    const bar = el("div", "tab-bar");
    const bodies = el("div", "tab-bodies");
    const panels: Record<string, HTMLElement> = {
      plan: this.buildPlanTab(),
      breed: this.buildBreedTab(),
      jobs: this.buildJobsTab(),
      lineage: this.buildLineageTab(),
    };
    for (const [name, panel] of Object.entries(panels)) {
      const button = el("button", "tab-button", name);
      button.addEventListener("click", () => {
        for (const b of bar.children) b.classList.remove("active");
        for (const p of bodies.children) p.classList.remove("active");
        button.classList.add("active");
        panel.classList.add("active");
      });
      bar.appendChild(button);
      panel.classList.add("tab-body");
      bodies.appendChild(panel);
    }
    (bar.firstElementChild as HTMLElement).classList.add("active");
    (bodies.firstElementChild as HTMLElement).classList.add("active");
    wrap.appendChild(bar);
    wrap.appendChild(bodies);
    return wrap;
  }

  private numberInput(value: number, title: string, step = 1): HTMLInputElement {
    const input = el("input") as HTMLInputElement;
    input.type = "number";
    input.value = String(value);
    input.step = String(step);
    input.title = title;
    return input;
  }

  private labelled(text: string, control: HTMLElement): HTMLElement {
    const wrap = el("label", "field");
    wrap.appendChild(el("span", "", text));
    wrap.appendChild(control);
    return wrap;
  }

  private buildPlanTab(): HTMLElement {
    const panel = el("div");
    const canvas = el("canvas", "plan-canvas") as HTMLCanvasElement;
    canvas.width = 384;
    canvas.height = 384;
    this.planEditor = new PlanEditor(canvas, 64);
    panel.appendChild(canvas);

    const controls = el("div", "controls");
    const res = el("select") as HTMLSelectElement;
    for (const r of [16, 32, 64]) {
      const opt = el("option", "", `${r} × ${r}`) as HTMLOptionElement;
      opt.value = String(r);
      if (r === 64) opt.selected = true;
      res.appendChild(opt);
    }
    res.addEventListener("change", () => this.planEditor.setResolution(Number(res.value)));
    controls.appendChild(this.labelled("plan size", res));
    const k = this.numberInput(1, "completions per plan");
    controls.appendChild(this.labelled("k", k));
    const seed = this.numberInput(0, "sampling seed");
    controls.appendChild(this.labelled("seed", seed));
    const topK = this.numberInput(32, "top-k cutoff");
    controls.appendChild(this.labelled("top-k", topK));
    const temperature = this.numberInput(1.0, "softmax temperature", 0.05);
    controls.appendChild(this.labelled("temperature", temperature));
    const clear = el("button", "", "clear");
    clear.addEventListener("click", () => this.planEditor.clear());
    controls.appendChild(clear);
    const submit = el("button", "primary", "complete plan");
    submit.addEventListener("click", () => {
      if (this.planEditor.plan.count() === 0) {
        this.log("plan_complete: draw at least one cell first");
        return;
      }
      void this.runJob("plan_complete", {
        plan: this.planEditor.plan.toBase64(),
        k: Number(k.value),
        seed: Number(seed.value),
        top_k: Number(topK.value),
        temperature: Number(temperature.value),
      });
    });
    controls.appendChild(submit);
    panel.appendChild(controls);
    panel.appendChild(
      el("p", "muted", "Drag to draw footprint cells; shift-drag or right-drag to erase."),
    );
    return panel;
  }

  private modelSelect(title: string): HTMLSelectElement {
    const select = el("select") as HTMLSelectElement;
    select.title = title;
    select.addEventListener("focus", () => {
      const current = select.value;
      select.textContent = "";
      for (const m of this.models) {
        const opt = el(
          "option",
          "",
          `${m.id.slice(0, 8)} · ${m.resolution}³ · ${m.lineage.op}`,
        ) as HTMLOptionElement;
        opt.value = m.id;
        select.appendChild(opt);
      }
      if (current) select.value = current;
    });
    return select;
  }

  private buildBreedTab(): HTMLElement {
    const panel = el("div");

    const genRow = el("div", "controls");
    const count = this.numberInput(2, "how many models to sample");
    const genSeed = this.numberInput(0, "sampling seed");
    const generate = el("button", "primary", "generate");
    generate.addEventListener("click", () => {
      void this.runJob("generate", { count: Number(count.value), seed: Number(genSeed.value) });
    });
    genRow.appendChild(this.labelled("count", count));
    genRow.appendChild(this.labelled("seed", genSeed));
    genRow.appendChild(generate);
    panel.appendChild(el("h3", "", "generate"));
    panel.appendChild(genRow);

    const interpRow = el("div", "controls");
    const parentA = this.modelSelect("parent A");
    const parentB = this.modelSelect("parent B");
    const interpolate = el("button", "primary", "interpolate");
    interpolate.addEventListener("click", () => {
      if (!parentA.value || !parentB.value) return this.log("interpolate: pick both parents");
      void this.runJob("interpolate", { a_id: parentA.value, b_id: parentB.value });
    });
    interpRow.appendChild(this.labelled("A", parentA));
    interpRow.appendChild(this.labelled("B", parentB));
    interpRow.appendChild(interpolate);
    panel.appendChild(el("h3", "", "interpolate"));
    panel.appendChild(interpRow);

    const varyRow = el("div", "controls");
    const varySource = this.modelSelect("model to vary");
    const n = this.numberInput(2, "variations to produce");
    const vary = el("button", "primary", "vary");
    vary.addEventListener("click", () => {
      if (!varySource.value) return this.log("vary: pick a model");
      void this.runJob("vary", { model_id: varySource.value, n: Number(n.value) });
    });
    varyRow.appendChild(this.labelled("model", varySource));
    varyRow.appendChild(this.labelled("n", n));
    varyRow.appendChild(vary);
    panel.appendChild(el("h3", "", "vary"));
    panel.appendChild(varyRow);

    const detailRow = el("div", "controls");
    const detailSource = this.modelSelect("model to detail");
    const level = this.numberInput(1, "upsampler levels to apply");
    const steps = this.numberInput(50, "DDIM steps");
    const detailise = el("button", "primary", "detailise");
    detailise.addEventListener("click", () => {
      if (!detailSource.value) return this.log("detailise: pick a model");
      void this.runJob("detailise", {
        model_id: detailSource.value,
        target_level: Number(level.value),
        ddim_steps: Number(steps.value),
      });
    });
    detailRow.appendChild(this.labelled("model", detailSource));
    detailRow.appendChild(this.labelled("level", level));
    detailRow.appendChild(this.labelled("steps", steps));
    detailRow.appendChild(detailise);
    panel.appendChild(el("h3", "", "detailise"));
    panel.appendChild(detailRow);

    return panel;
  }

  private buildJobsTab(): HTMLElement {
    const panel = el("div");
    this.jobTableEl = el("div", "job-table");
    panel.appendChild(this.jobTableEl);
    return panel;
  }

  private renderJobs(): void {
    this.jobTableEl.textContent = "";
    if (this.jobs.length === 0) {
      this.jobTableEl.appendChild(el("p", "muted", "No jobs yet."));
      return;
    }
    for (const job of this.jobs.slice(0, 40)) {
      const row = el("div", `job-row ${job.state}`);
      row.appendChild(el("span", "job-kind", job.kind));
      row.appendChild(el("span", "job-id", job.id.slice(0, 8)));
      row.appendChild(el("span", "job-state", job.state));
      const bar = el("div", "progress");
      const fill = el("div", "progress-fill");
      fill.style.width = `${Math.round(job.progress * 100)}%`;
      bar.appendChild(fill);
      row.appendChild(bar);
      if (job.error) row.appendChild(el("span", "job-error", job.error));
      this.jobTableEl.appendChild(row);
    }
  }

  private buildLineageTab(): HTMLElement {
    const panel = el("div");
    this.lineageEl = el("div", "lineage-host");
    panel.appendChild(this.lineageEl);
    return panel;
  }

  private renderLineagePanel(): void {
    renderLineage(
      this.lineageEl,
      buildLineage(this.models),
      (id) => void this.selectModel(id),
      this.selectedId,
    );
  }
}
