/* tslint:disable */
/* eslint-disable */

/**
 * Point-mass explorer on the unit square.
 */
export class Explorer {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Advance `steps` steps of 0.01 s; returns the visited points as `x y` pairs.
     */
    advance(steps: number): Float64Array;
    /**
     * Target density on a `bins x bins` grid, row-major with `y` rows, scaled
     * to a maximum of 1.
     */
    density(bins: number): Float64Array;
    /**
     * Ergodic metric of the trajectory so far.
     */
    metric(): number;
    /**
     * `means` holds `x0 y0 x1 y1 ...`; every component gets variance `var`
     * and equal weight.
     */
    constructor(means: Float64Array, _var: number, k: number, seed: bigint);
    time(): number;
    w_hat_ranks(): Uint32Array;
}

/**
 * Tab-separated rows `d, TT parameters of Ŵ, dense entries K^d` for an
 * isotropic Gaussian at the domain center.
 */
export function storage_table(max_d: number, k: number, _var: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_explorer_free: (a: number, b: number) => void;
    readonly explorer_advance: (a: number, b: number) => [number, number];
    readonly explorer_density: (a: number, b: number) => [number, number];
    readonly explorer_metric: (a: number) => number;
    readonly explorer_new: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly explorer_time: (a: number) => number;
    readonly explorer_w_hat_ranks: (a: number) => [number, number];
    readonly storage_table: (a: number, b: number, c: number) => [number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
