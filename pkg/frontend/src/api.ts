/**
 * Typed client for the exploration service.
 *
 * Mutating commands are funneled through a single promise chain so at most
 * one is in flight at a time; reads go straight out.  The client keeps no
 * caches: every view reflects a live response, and failures are surfaced to
 * the caller.
 */

export interface TablePayload {
  columns: string[];
  rows: Record<string, string>[];
  message?: string;
}

export interface ServiceError {
  error: string;
  position: number;
}

export interface ReportPayload {
  id: string;
  expression: string;
  fitness: string;
  parameters: string;
  size: string;
  dl: string;
  train: Record<string, string>;
  test?: Record<string, string>;
}

const MUTATING = /^(insert|optimize|import|load|save)\b/;

export class ApiError extends Error {
  position: number;
  status: number;

  constructor(status: number, body: ServiceError) {
    super(body.error);
    this.position = body.position;
    this.status = status;
  }
}

export class Client {
  private base: string;
  private writeQueue: Promise<unknown> = Promise.resolve();

  constructor(base = "") {
    this.base = base;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body as ServiceError);
    }
    return body as T;
  }

  /** Runs any command; mutations are serialized behind earlier mutations. */
  command(text: string): Promise<TablePayload> {
    const send = () =>
      this.request<TablePayload>("/command", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text }),
      });
    if (!MUTATING.test(text.trim())) {
      return send();
    }
    const queued = this.writeQueue.then(send, send);
    this.writeQueue = queued.catch(() => undefined);
    return queued;
  }

  pareto(by: "fitness" | "dl"): Promise<TablePayload> {
    return this.request<TablePayload>(`/pareto?by=${by}`);
  }

  report(id: number): Promise<ReportPayload> {
    return this.request<ReportPayload>(`/expr/${id}`);
  }

  health(): Promise<{ status: string }> {
    return this.request<{ status: string }>("/health");
  }
}
