let ratio = 0.25;
let txt = ratio.toFixed(2);
let caps = txt.toUpperCase();
