let xs = [1, 2, 3];
let n = xs.length;
let ys = xs.map(function (v) { return v + 1; });
let m = ys.length;
let s = xs.size;
