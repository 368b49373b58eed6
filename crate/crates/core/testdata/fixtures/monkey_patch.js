let fs = require('fs');
fs.size = function (filename){
    return fs.lstatSync(filename).size
};
let size = fs.size("my_file.txt");
