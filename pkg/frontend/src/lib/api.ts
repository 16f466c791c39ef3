/** Typed client for the voxarch HTTP service. */

export interface Lineage {
  parents: string[];
  op: string;
}

export interface ModelSummary {
  id: string;
  resolution: number;
  voxel_size: number;
  path: string;
  lineage: Lineage;
  created: number;
  has_tokens: boolean;
}

export interface ModelDetail extends ModelSummary {
  tokens: number[] | null;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface Job {
  id: string;
  kind: string;
  params: Record<string, unknown>;
  state: JobState;
  progress: number;
  result_ids: string[];
  result: Record<string, number> | null;
  error: string | null;
  created: number;
}

export interface Health {
  status: string;
  models: number;
  jobs: number;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
  }
}

export class JobFailedError extends Error {
  readonly job: Job;

  constructor(job: Job) {
    super(`job ${job.id} (${job.kind}) failed: ${job.error ?? "unknown error"}`);
    this.name = "JobFailedError";
    this.job = job;
  }
}

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (job: Job) => void;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body === "object" && "detail" in body) {
      const d = (body as { detail: unknown }).detail;
      return typeof d === "string" ? d : JSON.stringify(d);
    }
    return JSON.stringify(body);
  } catch {
    return response.statusText || "request failed";
  }
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(baseUrl: string, fetchFn: typeof fetch = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  health(): Promise<Health> {
    return this.json<Health>("/health");
  }

  listModels(): Promise<ModelSummary[]> {
    return this.json<ModelSummary[]>("/models");
  }

  getModel(id: string): Promise<ModelDetail> {
    return this.json<ModelDetail>(`/models/${id}`);
  }

  async getVoxelBytes(id: string): Promise<Uint8Array> {
    const response = await this.request(`/models/${id}/voxels`);
    return new Uint8Array(await response.arrayBuffer());
  }

  async uploadModel(payload: Uint8Array): Promise<ModelSummary> {
    return this.json<ModelSummary>("/models", {
      method: "POST",
      headers: { "content-type": "application/octet-stream" },
      body: payload as unknown as BodyInit,
    });
  }

  submitJob(kind: string, params: Record<string, unknown>): Promise<Job> {
    return this.json<Job>("/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind, params }),
    });
  }

  getJob(id: string): Promise<Job> {
    return this.json<Job>(`/jobs/${id}`);
  }

  listJobs(): Promise<Job[]> {
    return this.json<Job[]>("/jobs");
  }

  /** Poll a job until it settles; resolves on done, throws JobFailedError on failed. */
  async pollJob(id: string, options: PollOptions = {}): Promise<Job> {
    const interval = options.intervalMs ?? 250;
    const timeout = options.timeoutMs ?? 120_000;
    const sleep = options.sleep ?? defaultSleep;
    const deadline = Date.now() + timeout;
    for (;;) {
      const job = await this.getJob(id);
      options.onUpdate?.(job);
      if (job.state === "done") return job;
      if (job.state === "failed") throw new JobFailedError(job);
      if (Date.now() >= deadline) {
        throw new Error(`timed out after ${timeout} ms waiting for job ${id}`);
      }
      await sleep(interval);
    }
  }
}
