/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_attack_free: (a: number, b: number) => void;
export const __wbg_get_attack_adversarial: (a: number) => [number, number];
export const __wbg_get_attack_clean_pred: (a: number) => number;
export const __wbg_get_attack_delta: (a: number) => [number, number];
export const __wbg_get_attack_denoiser_calls: (a: number) => number;
export const __wbg_get_attack_final_pred: (a: number) => number;
export const __wbg_get_attack_iterations: (a: number) => number;
export const __wbg_get_attack_losses: (a: number) => [number, number];
export const __wbg_get_attack_psnr: (a: number) => number;
export const __wbg_get_attack_reconstruction: (a: number) => [number, number];
export const __wbg_get_attack_ssim: (a: number) => number;
export const __wbg_get_attack_success: (a: number) => number;
export const __wbg_get_inversion_max_error: (a: number) => number;
export const __wbg_get_inversion_noise_variance: (a: number) => [number, number];
export const __wbg_get_inversion_reconstruction: (a: number) => [number, number];
export const __wbg_get_inversion_top: (a: number) => [number, number];
export const __wbg_get_sweep_alphas: (a: number) => [number, number];
export const __wbg_get_sweep_frames: (a: number) => [number, number];
export const __wbg_get_sweep_losses: (a: number) => [number, number];
export const __wbg_get_sweep_predictions: (a: number) => [number, number];
export const __wbg_inversion_free: (a: number, b: number) => void;
export const __wbg_lab_free: (a: number, b: number) => void;
export const __wbg_set_attack_adversarial: (a: number, b: number, c: number) => void;
export const __wbg_set_attack_clean_pred: (a: number, b: number) => void;
export const __wbg_set_attack_delta: (a: number, b: number, c: number) => void;
export const __wbg_set_attack_denoiser_calls: (a: number, b: number) => void;
export const __wbg_set_attack_final_pred: (a: number, b: number) => void;
export const __wbg_set_attack_iterations: (a: number, b: number) => void;
export const __wbg_set_attack_losses: (a: number, b: number, c: number) => void;
export const __wbg_set_attack_psnr: (a: number, b: number) => void;
export const __wbg_set_attack_reconstruction: (a: number, b: number, c: number) => void;
export const __wbg_set_attack_ssim: (a: number, b: number) => void;
export const __wbg_set_attack_success: (a: number, b: number) => void;
export const __wbg_set_inversion_max_error: (a: number, b: number) => void;
export const __wbg_set_inversion_noise_variance: (a: number, b: number, c: number) => void;
export const __wbg_set_inversion_reconstruction: (a: number, b: number, c: number) => void;
export const __wbg_set_inversion_top: (a: number, b: number, c: number) => void;
export const __wbg_set_sweep_alphas: (a: number, b: number, c: number) => void;
export const __wbg_set_sweep_frames: (a: number, b: number, c: number) => void;
export const __wbg_set_sweep_losses: (a: number, b: number, c: number) => void;
export const __wbg_set_sweep_predictions: (a: number, b: number, c: number) => void;
export const __wbg_sweep_free: (a: number, b: number) => void;
export const lab_attack: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
export const lab_class_name: (a: number, b: number) => [number, number];
export const lab_clean_accuracy: (a: number) => [number, number, number];
export const lab_image: (a: number, b: number) => [number, number, number, number];
export const lab_image_count: (a: number) => number;
export const lab_invert: (a: number, b: number, c: number) => [number, number, number];
export const lab_label: (a: number, b: number) => [number, number, number];
export const lab_new: (a: number, b: number) => [number, number, number];
export const lab_predict: (a: number, b: number, c: number) => [number, number, number];
export const lab_side: (a: number) => number;
export const lab_sweep: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
