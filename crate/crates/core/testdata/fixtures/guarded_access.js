let fs = require('fs');
if (fs.size) {
    let size = fs.size("my_file.txt");
}
