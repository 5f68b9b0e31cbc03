/* tslint:disable */
/* eslint-disable */

/**
 * Layout: five numbers per probability, `[p, mean_return, ci95, nominal_return, oracle]`.
 */
export function mazeDegradation(channel: string, ps: Float64Array, train_episodes: number, seeds: number): Float64Array;

/**
 * `[nominal, low, high]` of a pendulum parameter, empty if unknown.
 */
export function paramBounds(param: string): Float64Array;

/**
 * Layout: `[total_return, theta[0..n], observed_theta[0..n], torque[0..n]]`.
 */
export function pendulumRollout(k1: number, k2: number, gravity: number, wind: number, length: number, obs_std: number, steps: number, seed: bigint): Float64Array;

/**
 * Per-episode values of a pendulum parameter; see [`demo::schedule_curve`].
 */
export function scheduleCurve(param: string, rule: string, a: number, b: number, c: number, episodes: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly mazeDegradation: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly paramBounds: (a: number, b: number) => [number, number];
    readonly pendulumRollout: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number, number];
    readonly scheduleCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: bigint) => [number, number, number, number];
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
