// Build with: wasm-pack build crates/wasm-demo --target web --out-dir www/pkg
import init, { two_site_dipoles, dressed_potential_map, dressing_matrix } from "./pkg/dressed_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function report(el, e) {
  el.textContent = String(e);
  el.className = "err";
}

function drawTraces(canvas, data) {
  const ctx = canvas.getContext("2d");
  const rows = data.length / 4;
  const t = (k) => data[4 * k];
  const ys = [1, 2, 3].flatMap((c) => Array.from({ length: rows }, (_, k) => data[4 * k + c]));
  const lo = Math.min(...ys), hi = Math.max(...ys);
  const sx = (v) => 40 + ((canvas.width - 50) * (v - t(0))) / (t(rows - 1) - t(0));
  const sy = (v) => canvas.height - 20 - ((canvas.height - 30) * (v - lo)) / (hi - lo || 1);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillText(hi.toFixed(3), 2, 14);
  ctx.fillText(lo.toFixed(3), 2, canvas.height - 20);
  ["#1f5fbf", "#c0392b", "#e67e22"].forEach((color, c) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    for (let k = 0; k < rows; k++) {
      const [x, y] = [sx(t(k)), sy(data[4 * k + c + 1])];
      k ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
  });
}

function drawMap(canvas, data, nx, nq) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(nx, nq);
  const lo = Math.min(...data), hi = Math.max(...data);
  for (let i = 0; i < nx; i++) {
    for (let a = 0; a < nq; a++) {
      const v = Math.sqrt((data[i * nq + a] - lo) / (hi - lo || 1));
      const px = 4 * ((nq - 1 - a) * nx + i);
      img.data.set([255 * v, 200 * v, 120 + 135 * v, 255], px);
    }
  }
  const off = new OffscreenCanvas(nx, nq);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

await init();

$("ts-run").onclick = () => {
  const status = $("ts-status");
  status.className = "";
  status.textContent = "running…";
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const data = two_site_dipoles(num("ts-lambda"), num("ts-tend"), num("ts-dt"), 400);
      drawTraces($("ts-canvas"), data);
      status.textContent = `${((performance.now() - t0) / 1000).toFixed(2)} s`;
    } catch (e) {
      report(status, e);
    }
  });
};

$("vp-run").onclick = () => {
  const status = $("vp-status");
  status.className = "";
  try {
    const [nx, nq] = [200, 200];
    const omega = num("vp-omega");
    const data = dressed_potential_map(num("vp-lambda"), omega, $("vp-approx").value, nx, nq, 8.0);
    drawMap($("vp-canvas"), data, nx, nq);
    status.textContent = `min ${Math.min(...data).toFixed(3)}, max ${Math.max(...data).toFixed(3)}`;
  } catch (e) {
    report(status, e);
  }
};

$("dm-run").onclick = () => {
  const out = $("dm-out");
  out.className = "";
  try {
    const n = parseInt($("dm-n").value, 10);
    const data = dressing_matrix(n);
    const rows = [];
    for (let i = 0; i < n; i++) {
      rows.push(Array.from(data.slice(i * n, (i + 1) * n), (v) => v.toFixed(4).padStart(8)).join(" "));
    }
    rows.push(`‖MMᵀ − I‖∞ = ${data[n * n].toExponential(2)}`);
    out.textContent = rows.join("\n");
  } catch (e) {
    report(out, e);
  }
};

$("ts-run").click();
$("vp-run").click();
$("dm-run").click();
