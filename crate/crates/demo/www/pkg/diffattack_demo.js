/* @ts-self-types="./diffattack_demo.d.ts" */

export class Attack {
    static __wrap(ptr) {
        const obj = Object.create(Attack.prototype);
        obj.__wbg_ptr = ptr;
        AttackFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        AttackFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_attack_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get adversarial() {
        const ret = wasm.__wbg_get_attack_adversarial(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get clean_pred() {
        const ret = wasm.__wbg_get_attack_clean_pred(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {Float64Array}
     */
    get delta() {
        const ret = wasm.__wbg_get_attack_delta(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Conditional plus unconditional denoiser calls spent.
     * @returns {number}
     */
    get denoiser_calls() {
        const ret = wasm.__wbg_get_attack_denoiser_calls(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get final_pred() {
        const ret = wasm.__wbg_get_attack_final_pred(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    get iterations() {
        const ret = wasm.__wbg_get_attack_iterations(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {Float64Array}
     */
    get losses() {
        const ret = wasm.__wbg_get_attack_losses(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get psnr() {
        const ret = wasm.__wbg_get_attack_psnr(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get reconstruction() {
        const ret = wasm.__wbg_get_attack_reconstruction(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get ssim() {
        const ret = wasm.__wbg_get_attack_ssim(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {boolean}
     */
    get success() {
        const ret = wasm.__wbg_get_attack_success(this.__wbg_ptr);
        return ret !== 0;
    }
    /**
     * @param {Float64Array} arg0
     */
    set adversarial(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_attack_adversarial(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set clean_pred(arg0) {
        wasm.__wbg_set_attack_clean_pred(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set delta(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_attack_delta(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * Conditional plus unconditional denoiser calls spent.
     * @param {number} arg0
     */
    set denoiser_calls(arg0) {
        wasm.__wbg_set_attack_denoiser_calls(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set final_pred(arg0) {
        wasm.__wbg_set_attack_final_pred(this.__wbg_ptr, arg0);
    }
    /**
     * @param {number} arg0
     */
    set iterations(arg0) {
        wasm.__wbg_set_attack_iterations(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set losses(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_attack_losses(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set psnr(arg0) {
        wasm.__wbg_set_attack_psnr(this.__wbg_ptr, arg0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set reconstruction(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_attack_reconstruction(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {number} arg0
     */
    set ssim(arg0) {
        wasm.__wbg_set_attack_ssim(this.__wbg_ptr, arg0);
    }
    /**
     * @param {boolean} arg0
     */
    set success(arg0) {
        wasm.__wbg_set_attack_success(this.__wbg_ptr, arg0);
    }
}
if (Symbol.dispose) Attack.prototype[Symbol.dispose] = Attack.prototype.free;

export class Inversion {
    static __wrap(ptr) {
        const obj = Object.create(Inversion.prototype);
        obj.__wbg_ptr = ptr;
        InversionFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        InversionFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_inversion_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get max_error() {
        const ret = wasm.__wbg_get_inversion_max_error(this.__wbg_ptr);
        return ret;
    }
    /**
     * Mean square of each noise map `z_1..z_T`; 1 for white noise.
     * @returns {Float64Array}
     */
    get noise_variance() {
        const ret = wasm.__wbg_get_inversion_noise_variance(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * Chain output replayed from the extracted latents.
     * @returns {Float64Array}
     */
    get reconstruction() {
        const ret = wasm.__wbg_get_inversion_reconstruction(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * The top latent `x_T`, for display.
     * @returns {Float64Array}
     */
    get top() {
        const ret = wasm.__wbg_get_inversion_top(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} arg0
     */
    set max_error(arg0) {
        wasm.__wbg_set_inversion_max_error(this.__wbg_ptr, arg0);
    }
    /**
     * Mean square of each noise map `z_1..z_T`; 1 for white noise.
     * @param {Float64Array} arg0
     */
    set noise_variance(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_inversion_noise_variance(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * Chain output replayed from the extracted latents.
     * @param {Float64Array} arg0
     */
    set reconstruction(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_inversion_reconstruction(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * The top latent `x_T`, for display.
     * @param {Float64Array} arg0
     */
    set top(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_inversion_top(this.__wbg_ptr, ptr0, len0);
    }
}
if (Symbol.dispose) Inversion.prototype[Symbol.dispose] = Inversion.prototype.free;

export class Lab {
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        LabFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_lab_free(ptr, 0);
    }
    /**
     * Runs the latent attack on image `index`. `estimator` is "rgf",
     * "skip-gradient" or "none".
     * @param {number} index
     * @param {string} estimator
     * @param {number} budget
     * @param {number} step_size
     * @param {number} iterations
     * @param {number} queries
     * @param {number} seed
     * @returns {Attack}
     */
    attack(index, estimator, budget, step_size, iterations, queries, seed) {
        const ptr0 = passStringToWasm0(estimator, wasm.__wbindgen_malloc, wasm.__wbindgen_realloc);
        const len0 = WASM_VECTOR_LEN;
        const ret = wasm.lab_attack(this.__wbg_ptr, index, ptr0, len0, budget, step_size, iterations, queries, seed);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return Attack.__wrap(ret[0]);
    }
    /**
     * @param {number} _class
     * @returns {string}
     */
    class_name(_class) {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.lab_class_name(this.__wbg_ptr, _class);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
    /**
     * Held-out accuracy of the classifier on the clean images.
     * @returns {number}
     */
    clean_accuracy() {
        const ret = wasm.lab_clean_accuracy(this.__wbg_ptr);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0];
    }
    /**
     * @param {number} index
     * @returns {Float64Array}
     */
    image(index) {
        const ret = wasm.lab_image(this.__wbg_ptr, index);
        if (ret[3]) {
            throw takeFromExternrefTable0(ret[2]);
        }
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    image_count() {
        const ret = wasm.lab_image_count(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Extracts the latents of image `index` and replays the chain.
     * @param {number} index
     * @param {number} seed
     * @returns {Inversion}
     */
    invert(index, seed) {
        const ret = wasm.lab_invert(this.__wbg_ptr, index, seed);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return Inversion.__wrap(ret[0]);
    }
    /**
     * @param {number} index
     * @returns {number}
     */
    label(index) {
        const ret = wasm.lab_label(this.__wbg_ptr, index);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0] >>> 0;
    }
    /**
     * Builds the prior, a held-out image set and a trained classifier.
     * `guidance` is the guidance scale of the class condition.
     * @param {number} seed
     * @param {number} guidance
     */
    constructor(seed, guidance) {
        const ret = wasm.lab_new(seed, guidance);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        this.__wbg_ptr = ret[0];
        LabFinalization.register(this, this.__wbg_ptr, this);
        return this;
    }
    /**
     * @param {Float64Array} pixels
     * @returns {number}
     */
    predict(pixels) {
        const ptr0 = passArrayF64ToWasm0(pixels, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        const ret = wasm.lab_predict(this.__wbg_ptr, ptr0, len0);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return ret[0] >>> 0;
    }
    /**
     * @returns {number}
     */
    side() {
        const ret = wasm.lab_side(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * Moves the top latent along one direction, `alpha` from 0 to
     * `radius` in `frames` steps, with the noise maps held fixed.
     * `direction` is "gradient" (sign of the skip gradient of the loss)
     * or "random" (a random sign pattern).
     * @param {number} index
     * @param {string} direction
     * @param {number} radius
     * @param {number} frames
     * @returns {Sweep}
     */
    sweep(index, direction, radius, frames) {
        const ptr0 = passStringToWasm0(direction, wasm.__wbindgen_malloc, wasm.__wbindgen_realloc);
        const len0 = WASM_VECTOR_LEN;
        const ret = wasm.lab_sweep(this.__wbg_ptr, index, ptr0, len0, radius, frames);
        if (ret[2]) {
            throw takeFromExternrefTable0(ret[1]);
        }
        return Sweep.__wrap(ret[0]);
    }
}
if (Symbol.dispose) Lab.prototype[Symbol.dispose] = Lab.prototype.free;

export class Sweep {
    static __wrap(ptr) {
        const obj = Object.create(Sweep.prototype);
        obj.__wbg_ptr = ptr;
        SweepFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        SweepFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_sweep_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get alphas() {
        const ret = wasm.__wbg_get_sweep_alphas(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * `alphas.len()` clamped frames of `SIDE * SIDE` pixels each.
     * @returns {Float64Array}
     */
    get frames() {
        const ret = wasm.__wbg_get_sweep_frames(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    get losses() {
        const ret = wasm.__wbg_get_sweep_losses(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Uint32Array}
     */
    get predictions() {
        const ret = wasm.__wbg_get_sweep_predictions(this.__wbg_ptr);
        var v1 = getArrayU32FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 4, 4);
        return v1;
    }
    /**
     * @param {Float64Array} arg0
     */
    set alphas(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_sweep_alphas(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * `alphas.len()` clamped frames of `SIDE * SIDE` pixels each.
     * @param {Float64Array} arg0
     */
    set frames(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_sweep_frames(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {Float64Array} arg0
     */
    set losses(arg0) {
        const ptr0 = passArrayF64ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_sweep_losses(this.__wbg_ptr, ptr0, len0);
    }
    /**
     * @param {Uint32Array} arg0
     */
    set predictions(arg0) {
        const ptr0 = passArray32ToWasm0(arg0, wasm.__wbindgen_malloc);
        const len0 = WASM_VECTOR_LEN;
        wasm.__wbg_set_sweep_predictions(this.__wbg_ptr, ptr0, len0);
    }
}
if (Symbol.dispose) Sweep.prototype[Symbol.dispose] = Sweep.prototype.free;
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_generic_0000000000000001: function(arg0, arg1) {
            // Cast intrinsic for `Ref(String) -> Externref`.
            const ret = getStringFromWasm0(arg0, arg1);
            return ret;
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./diffattack_demo_bg.js": import0,
    };
}

const AttackFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_attack_free(ptr, 1));
const InversionFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_inversion_free(ptr, 1));
const LabFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_lab_free(ptr, 1));
const SweepFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_sweep_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

function getArrayU32FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getUint32ArrayMemory0().subarray(ptr / 4, ptr / 4 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint32ArrayMemory0 = null;
function getUint32ArrayMemory0() {
    if (cachedUint32ArrayMemory0 === null || cachedUint32ArrayMemory0.byteLength === 0) {
        cachedUint32ArrayMemory0 = new Uint32Array(wasm.memory.buffer);
    }
    return cachedUint32ArrayMemory0;
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function passArray32ToWasm0(arg, malloc) {
    const ptr = malloc(arg.length * 4, 4) >>> 0;
    getUint32ArrayMemory0().set(arg, ptr / 4);
    WASM_VECTOR_LEN = arg.length;
    return ptr;
}

function passArrayF64ToWasm0(arg, malloc) {
    const ptr = malloc(arg.length * 8, 8) >>> 0;
    getFloat64ArrayMemory0().set(arg, ptr / 8);
    WASM_VECTOR_LEN = arg.length;
    return ptr;
}

function passStringToWasm0(arg, malloc, realloc) {
    if (realloc === undefined) {
        const buf = cachedTextEncoder.encode(arg);
        const ptr = malloc(buf.length, 1) >>> 0;
        getUint8ArrayMemory0().subarray(ptr, ptr + buf.length).set(buf);
        WASM_VECTOR_LEN = buf.length;
        return ptr;
    }

    let len = arg.length;
    let ptr = malloc(len, 1) >>> 0;

    const mem = getUint8ArrayMemory0();

    let offset = 0;

    for (; offset < len; offset++) {
        const code = arg.charCodeAt(offset);
        if (code > 0x7F) break;
        mem[ptr + offset] = code;
    }
    if (offset !== len) {
        if (offset !== 0) {
            arg = arg.slice(offset);
        }
        ptr = realloc(ptr, len, len = offset + arg.length * 3, 1) >>> 0;
        const view = getUint8ArrayMemory0().subarray(ptr + offset, ptr + len);
        const ret = cachedTextEncoder.encodeInto(arg, view);

        offset += ret.written;
        ptr = realloc(ptr, len, offset, 1) >>> 0;
    }

    WASM_VECTOR_LEN = offset;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

const cachedTextEncoder = new TextEncoder();

if (!('encodeInto' in cachedTextEncoder)) {
    cachedTextEncoder.encodeInto = function (arg, view) {
        const buf = cachedTextEncoder.encode(arg);
        view.set(buf);
        return {
            read: arg.length,
            written: buf.length
        };
    };
}

let WASM_VECTOR_LEN = 0;

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint32ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('diffattack_demo_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
