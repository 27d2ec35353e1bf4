import init, { Lab } from "./pkg/diffattack_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let lab = null;

// Grayscale render; `lo`/`hi` map to black/white.
function draw(canvas, pixels, lo = 0, hi = 1) {
  const side = lab.side();
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(side, side);
  for (let i = 0; i < side * side; i++) {
    const v = Math.round(255 * Math.min(1, Math.max(0, (pixels[i] - lo) / (hi - lo))));
    img.data.set([v, v, v, 255], 4 * i);
  }
  ctx.putImageData(img, 0, 0);
}

function symmetric(pixels) {
  const m = Math.max(1e-12, ...Array.from(pixels, Math.abs));
  return [-m, m];
}

function index() {
  return Math.min(Math.max(0, num("index")), lab.image_count() - 1);
}

function className(c) {
  return `${c} (${lab.class_name(c)})`;
}

function guard(fn) {
  return () => {
    try {
      fn();
    } catch (e) {
      $("status").textContent = `error: ${e}`;
    }
  };
}

function build() {
  if (lab) lab.free();
  $("status").textContent = "building...";
  lab = new Lab(num("seed"), num("guidance"));
  $("index").max = lab.image_count() - 1;
  $("status").textContent =
    `${lab.image_count()} held-out images, clean accuracy ${(100 * lab.clean_accuracy()).toFixed(1)}%`;
}

function invert() {
  const i = index();
  const r = lab.invert(i, num("seed"));
  draw($("inv-clean"), lab.image(i));
  draw($("inv-top"), r.top, ...symmetric(r.top));
  draw($("inv-recon"), r.reconstruction);
  const ms = Array.from(r.noise_variance, (v) => v.toFixed(2)).join(" ");
  $("inv-out").textContent =
    `label ${className(lab.label(i))}\nmax |replay - image| = ${r.max_error.toExponential(2)}\n` +
    `mean square of z_1..z_T: ${ms}`;
  r.free();
}

function sweep() {
  const i = index();
  const s = lab.sweep(i, $("dir").value, num("radius"), 9);
  const side = lab.side();
  const strip = $("strip");
  strip.replaceChildren();
  const lines = [];
  s.alphas.forEach((a, k) => {
    const fig = document.createElement("figure");
    const c = document.createElement("canvas");
    c.width = c.height = side;
    draw(c, s.frames.subarray(k * side * side, (k + 1) * side * side));
    const cap = document.createElement("figcaption");
    cap.textContent = `${a.toFixed(2)} -> ${s.predictions[k]}`;
    fig.append(c, cap);
    strip.append(fig);
    lines.push(`alpha ${a.toFixed(3)}  pred ${s.predictions[k]}  loss ${s.losses[k].toFixed(4)}`);
  });
  $("sweep-out").textContent = `label ${className(lab.label(i))}\n` + lines.join("\n");
  s.free();
}

function attack() {
  const i = index();
  const t0 = performance.now();
  const a = lab.attack(i, $("est").value, num("budget"), num("step"), num("iters"), num("queries"), num("seed"));
  const ms = performance.now() - t0;
  draw($("atk-clean"), lab.image(i));
  draw($("atk-recon"), a.reconstruction);
  draw($("atk-adv"), a.adversarial);
  draw($("atk-delta"), a.delta, ...symmetric(a.delta));
  $("atk-out").textContent =
    `label ${className(lab.label(i))}, clean prediction ${className(a.clean_pred)}\n` +
    `${a.success ? "flipped" : "not flipped"} to ${className(a.final_pred)} after ${a.iterations} iterations\n` +
    `SSIM ${a.ssim.toFixed(3)}  PSNR ${a.psnr.toFixed(2)} dB\n` +
    `loss per iteration: ${Array.from(a.losses, (l) => l.toFixed(3)).join(" ")}\n` +
    `${a.denoiser_calls} denoiser calls in ${ms.toFixed(0)} ms`;
  a.free();
}

await init();
guard(build)();
$("build").onclick = guard(build);
$("invert").onclick = guard(invert);
$("sweep").onclick = guard(sweep);
$("attack").onclick = guard(attack);
