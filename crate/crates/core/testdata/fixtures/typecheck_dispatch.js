let fs = require('fs');
function getSize(arg) {
    if (arg instanceof fs.Stats) {
        return arg.size;
    }
    return fs.fstatSync(arg).size;
}
let size1 = getSize(fs.openSync("file.txt"));
let size2 = getSize(fs.lstatSync("file.txt"));
