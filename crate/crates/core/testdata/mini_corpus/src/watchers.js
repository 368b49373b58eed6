let fs = require('fs');
fs.readFile("a.json", (err, a) => { console.log(a); });
fs.readFile("b.json", (err, b) => { console.log(b); });
fs.readFile("c.json", (err, c) => { console.log(c); });
fs.readFile("d.json", (err, d) => { console.log(d); });
