import { PlaygroundClient } from './api.js';
import { App } from './app.js';

const root = document.getElementById('app');
if (!root) throw new Error('missing #app mount point');

// same-origin by default; override with ?api=http://host:port for dev setups
const params = new URLSearchParams(window.location.search);
const app = new App(root, new PlaygroundClient(params.get('api') ?? ''));
app.start();
