/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_explorer_free: (a: number, b: number) => void;
export const explorer_advance: (a: number, b: number) => [number, number];
export const explorer_density: (a: number, b: number) => [number, number];
export const explorer_metric: (a: number) => number;
export const explorer_new: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const explorer_time: (a: number) => number;
export const explorer_w_hat_ranks: (a: number) => [number, number];
export const storage_table: (a: number, b: number, c: number) => [number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
