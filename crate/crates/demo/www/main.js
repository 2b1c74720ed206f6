// Built with: wasm-pack build crates/demo --target web --out-dir www/pkg
import init, { selfSimilar, talbotProfile, angleTable, cornerQuantities } from "./pkg/binormal_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function fail(el, e) {
  el.className = "err";
  el.textContent = String(e.message ?? e);
}

function polyline(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const span = Math.max(x1 - x0, y1 - y0, 1e-9);
  const pad = 20;
  const s = Math.min((canvas.width - 2 * pad) / (x1 - x0 || span), (canvas.height - 2 * pad) / (y1 - y0 || span));
  ctx.beginPath();
  xs.forEach((x, i) => {
    const px = pad + (x - x0) * s;
    const py = canvas.height - pad - (ys[i] - y0) * s;
    i ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
  });
  ctx.strokeStyle = "#1f5fa8";
  ctx.stroke();
}

function drawSelfSimilar() {
  const info = $("ss-info");
  info.className = "";
  try {
    const v = selfSimilar(num("ss-alpha"), num("ss-t"), 2.0);
    const n = (v.length - 2) / 3;
    const axes = { xy: [0, 1], xz: [0, 2], yz: [1, 2] }[$("ss-view").value];
    const xs = [], ys = [];
    for (let i = 0; i < n; i++) {
      xs.push(v[3 * i + axes[0]]);
      ys.push(v[3 * i + axes[1]]);
    }
    polyline($("ss-canvas"), xs, ys);
    const [measured, target] = v.slice(-2);
    info.textContent = Number.isNaN(measured)
      ? `cos(phi) target ${target.toFixed(6)}; t too large to fit the corner`
      : `cos(phi) measured ${measured.toFixed(6)}, target ${target.toFixed(6)}`;
  } catch (e) {
    fail(info, e);
  }
}

function drawTalbot() {
  const info = $("tb-info");
  info.className = "";
  const [n, p, q] = [num("tb-n"), num("tb-p"), num("tb-q")];
  try {
    const samples = 2000;
    const prof = talbotProfile(n, p, q, samples);
    polyline($("tb-canvas"), prof.map((_, i) => i / (samples - 1)), prof);
    info.textContent = `|psi| over one period of the ${n}-gon at t = ${p}/(${q} 2 pi ${n}^2)`;
    const rows = angleTable(n, q);
    let html = "<tr><th>q</th><th>alpha / sqrt(q)</th><th>theta</th></tr>";
    for (let i = 0; i < rows.length; i += 3) {
      html += `<tr><td>${rows[i]}</td><td>${rows[i + 1].toFixed(6)}</td><td>${rows[i + 2].toFixed(6)}</td></tr>`;
    }
    $("tb-table").innerHTML = html;
  } catch (e) {
    fail(info, e);
  }
}

function showCorner() {
  const a = num("cq-alpha");
  const [theta, cosPhi, jump] = cornerQuantities(a);
  $("cq-out").textContent =
    `alpha = ${a.toFixed(2)}: theta = ${theta.toFixed(5)}, cos(phi) = ${cosPhi.toFixed(5)}, |A+ - A-|^2 = ${jump.toFixed(5)}`;
}

await init();
$("ss-run").onclick = drawSelfSimilar;
$("tb-run").onclick = drawTalbot;
$("cq-alpha").oninput = showCorner;
drawSelfSimilar();
drawTalbot();
showCorner();
