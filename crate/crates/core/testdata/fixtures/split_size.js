var fs = require('fs');
function sourceFiles(data) {
  data.forEach(function(elem, index) {
    var content;
    try {
      content = fs.readFileSync(elem.file).toString();
    } catch (e) {
    }
    var numLines = content.split("\n").size;
  });
}
