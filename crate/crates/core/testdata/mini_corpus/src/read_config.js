let fs = require('fs');
let path = require('path');

function readConfig(name) {
    let full = path.join("conf", name);
    if (fs.existsSync(full)) {
        let text = fs.readFileSync(full).toString();
        return text;
    }
    return "";
}

fs.readFile(path.join("conf", "app.json"), (err, data) => {
    console.log("loaded " + data);
});
