let fs = require('fs');

function statSize(p) {
    let st = fs.lstatSync(p);
    return st.size;
}

function fdSize(fd) {
    let st = fs.fstatSync(fd);
    return st.size;
}

let total = statSize("a.txt") + fdSize(3);
let quick = fs.size("b.txt");
