import init, { Demo, Layer } from "./pkg/salsi_web.js";

const $ = (id) => document.getElementById(id);
const layers = { amplitude: Layer.Amplitude, saliency: Layer.Saliency, mask: Layer.Mask };
let demo = null;

function status(text) {
  $("status").textContent = text;
}

function draw() {
  if (!demo) return;
  const axis = $("axis").value;
  const [w, h] = demo.section_shape(axis);
  const index = Math.min(Number($("index").value), demo.size() - 1);
  for (const [id, layer] of Object.entries(layers)) {
    const canvas = $(id);
    canvas.width = w;
    canvas.height = h;
    const px = demo.render(layer, axis, index, $("overlay").checked);
    canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(px), w, h), 0, 0);
  }
}

function generate() {
  if (demo) demo.free();
  const size = Number($("size").value);
  demo = new Demo(size, Number($("noise").value), Number($("seed").value));
  $("index").max = size - 1;
  $("index").value = size >> 1;
  status(`generated ${size}^3 volume`);
  draw();
}

function compute() {
  const t0 = performance.now();
  const auc = demo.compute(Number($("window").value), Number($("radius").value));
  const ms = (performance.now() - t0).toFixed(0);
  status(`auc=${auc.toFixed(4)} otsu_threshold=${demo.threshold()} time=${ms}ms`);
  draw();
}

function guarded(f) {
  return () => {
    try {
      f();
    } catch (e) {
      status(`error: ${e.message ?? e}`);
    }
  };
}

await init();
$("generate").onclick = guarded(generate);
$("compute").onclick = guarded(compute);
for (const id of ["axis", "index", "overlay"]) $(id).oninput = guarded(draw);
guarded(generate)();
