let fs = require('fs');
fs.exists2 = function (p) {
    return fs.existsSync(p);
};
if (fs.exists2("data.bin")) {
    fs.readFile("data.bin", (err, buf) => {
        let header = buf.slice(0, 4);
    });
}
