// Copyright 2026 tclq Contributors
// SPDX-License-Identifier: Apache-2.0

import init, { three_level_study, k2_rate_curve, kernel_curve } from "./pkg/tclq_web.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  ctx.clearRect(0, 0, W, H);
  const pad = { l: 52, r: 10, t: 10, b: 24 };
  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const s of series) {
    for (let i = 0; i < s.x.length; i++) {
      const y = s.y[i];
      if (!isFinite(y)) continue;
      xmin = Math.min(xmin, s.x[i]); xmax = Math.max(xmax, s.x[i]);
      ymin = Math.min(ymin, y); ymax = Math.max(ymax, y);
    }
  }
  if (!isFinite(ymin)) return;
  if (opts.ymin !== undefined) ymin = opts.ymin;
  if (opts.ymax !== undefined) ymax = opts.ymax;
  if (ymax - ymin < 1e-12) { ymax += 1; ymin -= 1; }
  const sx = (x) => pad.l + (x - xmin) / (xmax - xmin) * (W - pad.l - pad.r);
  const sy = (y) => H - pad.b - (y - ymin) / (ymax - ymin) * (H - pad.t - pad.b);

  ctx.strokeStyle = "#8886"; ctx.fillStyle = "#888"; ctx.lineWidth = 1;
  ctx.font = "11px sans-serif";
  const yticks = 5;
  for (let i = 0; i <= yticks; i++) {
    const y = ymin + (ymax - ymin) * i / yticks;
    ctx.beginPath(); ctx.moveTo(pad.l, sy(y)); ctx.lineTo(W - pad.r, sy(y)); ctx.stroke();
    ctx.fillText(y.toPrecision(3), 4, sy(y) + 4);
  }
  const xticks = 8;
  for (let i = 0; i <= xticks; i++) {
    const x = xmin + (xmax - xmin) * i / xticks;
    ctx.fillText(x.toPrecision(3), sx(x) - 10, H - 8);
  }
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.8;
    if (s.dash) ctx.setLineDash([6, 4]); else ctx.setLineDash([]);
    ctx.beginPath();
    let started = false;
    for (let i = 0; i < s.x.length; i++) {
      const y = s.y[i];
      if (!isFinite(y)) { started = false; continue; }
      if (!started) { ctx.moveTo(sx(s.x[i]), sy(y)); started = true; }
      else ctx.lineTo(sx(s.x[i]), sy(y));
    }
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

const log10 = (arr) => arr.map((v) => (v > 0 ? Math.log10(v) : NaN));

function refreshStudy() {
  const gamma = +$("gamma").value, g = +$("g").value, lambda = +$("lambda").value;
  $("gamma-v").value = gamma.toFixed(2);
  $("g-v").value = g.toFixed(2);
  $("lambda-v").value = lambda.toFixed(3);
  const data = JSON.parse(three_level_study(gamma, g, lambda, +$("state").value, 4.0, 241));
  if (data.error) { $("status").textContent = "error: " + data.error; return; }
  plot($("pop"), [
    { x: data.times, y: data.exact_p11, color: "#4477aa" },
    { x: data.times, y: data.tcl2_p11, color: "#ee6677" },
    { x: data.times, y: data.bvh_p11, color: "#228833" },
    { x: data.times, y: data.exact_coh01, color: "#aa7744" },
  ], { ymin: 0 });
  plot($("err"), [
    { x: data.times, y: log10(data.err_tcl2), color: "#ee6677" },
    { x: data.times, y: log10(data.err_bvh), color: "#228833" },
    { x: data.times, y: log10(data.err_bvh_unrenormalized), color: "#999933" },
  ]);
  $("status").textContent = data.relaxation_enhanced
    ? "relaxation conditions: enhanced (weak-coupling limit certified)"
    : "relaxation conditions NOT satisfied for these parameters";
}

function refreshRate() {
  const gamma = +$("gamma").value, g = +$("g").value;
  const data = JSON.parse(k2_rate_curve(gamma, g, 16.0 / gamma, 241));
  if (data.error) return;
  plot($("rate"), [
    { x: data.times, y: data.rate, color: "#4477aa" },
    { x: data.times, y: data.times.map(() => data.limit), color: "#888888", dash: true },
  ], { ymin: 0 });
}

function refreshKernel() {
  const k = +$("kk").value;
  const gs = [+$("g1re").value, +$("g1im").value];
  if (k >= 2) gs.push(+$("g2re").value, +$("g2im").value);
  if (k >= 3) gs.push(0.3, -0.2);
  $("g1re-v").value = (+$("g1re").value).toFixed(2);
  $("g1im-v").value = (+$("g1im").value).toFixed(2);
  $("g2re-v").value = (+$("g2re").value).toFixed(2);
  $("g2im-v").value = (+$("g2im").value).toFixed(2);
  const data = JSON.parse(kernel_curve(gs, 8.0, 241));
  if (data.error) return;
  plot($("kern"), [
    { x: data.times, y: data.re, color: "#4477aa" },
    { x: data.times, y: data.im, color: "#ee6677" },
  ]);
}

async function main() {
  await init();
  $("status").textContent = "ready";
  for (const id of ["gamma", "g", "lambda", "state"]) {
    $(id).addEventListener("input", () => { refreshStudy(); refreshRate(); });
  }
  for (const id of ["kk", "g1re", "g1im", "g2re", "g2im"]) {
    $(id).addEventListener("input", refreshKernel);
  }
  refreshStudy();
  refreshRate();
  refreshKernel();
}

main().catch((e) => { $("status").textContent = "failed to load wasm: " + e; });
