import path from 'path';
function withTrailingSlash(path) {
  return path[path.length-1] === '/' ? path : path+'/';
}
function mkdir(fullPath) {
  return new Promise(function(resolve, reject) {
    initOS('readwrite', function (os) {
      const dir = withTrailingSlash(path);
    });
  });
}
