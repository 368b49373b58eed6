let path = require('path');
function withSlash(p) {
    return p[p.length - 1] === "/" ? p : p + "/";
}
let dir = withSlash(path);
