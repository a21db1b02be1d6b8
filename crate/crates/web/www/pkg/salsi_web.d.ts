/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Recomputes saliency, segmentation and AUC with the given window and
     * closing radius. Returns the AUC.
     */
    compute(window: number, se_radius: number): number;
    /**
     * Cubic dome of edge `size` (at least 16) with noise level `noise_sigma`.
     */
    constructor(size: number, noise_sigma: number, seed: number);
    /**
     * RGBA pixels of one section; ground-truth voxels are tinted red when
     * `overlay` is set. Layers not yet computed render black.
     */
    render(layer: Layer, axis: string, index: number, overlay: boolean): Uint8Array;
    /**
     * `[width, height]` of sections across `axis`.
     */
    section_shape(axis: string): Uint32Array;
    size(): number;
    /**
     * Otsu level of the last computation, or -1.
     */
    threshold(): number;
}

/**
 * Layer drawn by [`Demo::render`].
 */
export enum Layer {
    Amplitude = 0,
    Saliency = 1,
    Mask = 2,
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_compute: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_render: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_section_shape: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demo_size: (a: number) => number;
    readonly demo_threshold: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
