/* tslint:disable */
/* eslint-disable */

/**
 * Information ratio of a seeded random posterior with at most `n` atoms.
 */
export function info_ratio_random(kind: string, dim: number, beta: number, n: number, seed: bigint): string;

/**
 * Information ratio of a two-atom posterior in the plane: atoms at angles 0
 * and `angle` (radians), the first with mass `weight`.
 */
export function info_ratio_two_atom(beta: number, angle: number, weight: number): string;

/**
 * `ψ_β` and its surrogate on `[0, 2]`.
 */
export function psi_curves(beta: number, resolution: number): string;

/**
 * Mean cumulative expected regret of Thompson Sampling under a uniform prior
 * on the sphere, with the closed-form bound at every step.
 */
export function regret_curve(dim: number, beta: number, horizon: number, episodes: number, particles: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly info_ratio_random: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly info_ratio_two_atom: (a: number, b: number, c: number) => [number, number, number, number];
    readonly psi_curves: (a: number, b: number) => [number, number, number, number];
    readonly regret_curve: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
