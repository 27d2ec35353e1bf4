/* tslint:disable */
/* eslint-disable */

export class Attack {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    adversarial: Float64Array;
    clean_pred: number;
    delta: Float64Array;
    /**
     * Conditional plus unconditional denoiser calls spent.
     */
    denoiser_calls: number;
    final_pred: number;
    iterations: number;
    losses: Float64Array;
    psnr: number;
    reconstruction: Float64Array;
    ssim: number;
    success: boolean;
}

export class Inversion {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    max_error: number;
    /**
     * Mean square of each noise map `z_1..z_T`; 1 for white noise.
     */
    noise_variance: Float64Array;
    /**
     * Chain output replayed from the extracted latents.
     */
    reconstruction: Float64Array;
    /**
     * The top latent `x_T`, for display.
     */
    top: Float64Array;
}

export class Lab {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Runs the latent attack on image `index`. `estimator` is "rgf",
     * "skip-gradient" or "none".
     */
    attack(index: number, estimator: string, budget: number, step_size: number, iterations: number, queries: number, seed: number): Attack;
    class_name(_class: number): string;
    /**
     * Held-out accuracy of the classifier on the clean images.
     */
    clean_accuracy(): number;
    image(index: number): Float64Array;
    image_count(): number;
    /**
     * Extracts the latents of image `index` and replays the chain.
     */
    invert(index: number, seed: number): Inversion;
    label(index: number): number;
    /**
     * Builds the prior, a held-out image set and a trained classifier.
     * `guidance` is the guidance scale of the class condition.
     */
    constructor(seed: number, guidance: number);
    predict(pixels: Float64Array): number;
    side(): number;
    /**
     * Moves the top latent along one direction, `alpha` from 0 to
     * `radius` in `frames` steps, with the noise maps held fixed.
     * `direction` is "gradient" (sign of the skip gradient of the loss)
     * or "random" (a random sign pattern).
     */
    sweep(index: number, direction: string, radius: number, frames: number): Sweep;
}

export class Sweep {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    alphas: Float64Array;
    /**
     * `alphas.len()` clamped frames of `SIDE * SIDE` pixels each.
     */
    frames: Float64Array;
    losses: Float64Array;
    predictions: Uint32Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_attack_free: (a: number, b: number) => void;
    readonly __wbg_get_attack_adversarial: (a: number) => [number, number];
    readonly __wbg_get_attack_clean_pred: (a: number) => number;
    readonly __wbg_get_attack_delta: (a: number) => [number, number];
    readonly __wbg_get_attack_denoiser_calls: (a: number) => number;
    readonly __wbg_get_attack_final_pred: (a: number) => number;
    readonly __wbg_get_attack_iterations: (a: number) => number;
    readonly __wbg_get_attack_losses: (a: number) => [number, number];
    readonly __wbg_get_attack_psnr: (a: number) => number;
    readonly __wbg_get_attack_reconstruction: (a: number) => [number, number];
    readonly __wbg_get_attack_ssim: (a: number) => number;
    readonly __wbg_get_attack_success: (a: number) => number;
    readonly __wbg_get_inversion_max_error: (a: number) => number;
    readonly __wbg_get_inversion_noise_variance: (a: number) => [number, number];
    readonly __wbg_get_inversion_reconstruction: (a: number) => [number, number];
    readonly __wbg_get_inversion_top: (a: number) => [number, number];
    readonly __wbg_get_sweep_alphas: (a: number) => [number, number];
    readonly __wbg_get_sweep_frames: (a: number) => [number, number];
    readonly __wbg_get_sweep_losses: (a: number) => [number, number];
    readonly __wbg_get_sweep_predictions: (a: number) => [number, number];
    readonly __wbg_inversion_free: (a: number, b: number) => void;
    readonly __wbg_lab_free: (a: number, b: number) => void;
    readonly __wbg_set_attack_adversarial: (a: number, b: number, c: number) => void;
    readonly __wbg_set_attack_clean_pred: (a: number, b: number) => void;
    readonly __wbg_set_attack_delta: (a: number, b: number, c: number) => void;
    readonly __wbg_set_attack_denoiser_calls: (a: number, b: number) => void;
    readonly __wbg_set_attack_final_pred: (a: number, b: number) => void;
    readonly __wbg_set_attack_iterations: (a: number, b: number) => void;
    readonly __wbg_set_attack_losses: (a: number, b: number, c: number) => void;
    readonly __wbg_set_attack_psnr: (a: number, b: number) => void;
    readonly __wbg_set_attack_reconstruction: (a: number, b: number, c: number) => void;
    readonly __wbg_set_attack_ssim: (a: number, b: number) => void;
    readonly __wbg_set_attack_success: (a: number, b: number) => void;
    readonly __wbg_set_inversion_max_error: (a: number, b: number) => void;
    readonly __wbg_set_inversion_noise_variance: (a: number, b: number, c: number) => void;
    readonly __wbg_set_inversion_reconstruction: (a: number, b: number, c: number) => void;
    readonly __wbg_set_inversion_top: (a: number, b: number, c: number) => void;
    readonly __wbg_set_sweep_alphas: (a: number, b: number, c: number) => void;
    readonly __wbg_set_sweep_frames: (a: number, b: number, c: number) => void;
    readonly __wbg_set_sweep_losses: (a: number, b: number, c: number) => void;
    readonly __wbg_set_sweep_predictions: (a: number, b: number, c: number) => void;
    readonly __wbg_sweep_free: (a: number, b: number) => void;
    readonly lab_attack: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly lab_class_name: (a: number, b: number) => [number, number];
    readonly lab_clean_accuracy: (a: number) => [number, number, number];
    readonly lab_image: (a: number, b: number) => [number, number, number, number];
    readonly lab_image_count: (a: number) => number;
    readonly lab_invert: (a: number, b: number, c: number) => [number, number, number];
    readonly lab_label: (a: number, b: number) => [number, number, number];
    readonly lab_new: (a: number, b: number) => [number, number, number];
    readonly lab_predict: (a: number, b: number, c: number) => [number, number, number];
    readonly lab_side: (a: number) => number;
    readonly lab_sweep: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
