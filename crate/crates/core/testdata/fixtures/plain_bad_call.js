let fs = require('fs');
let filename = "my_file.txt";
let size = fs.size(filename);
fs.readFile(filename, (err, file_contents) => {
    console.log("File contents: " + file_contents);
});
